"""
propinquity-lab：有限维量子紧度量空间、度量化量子向量丛与度量量子向量丛上的
隧道构造与对偶邻近度估计
"""
__version__ = "0.1.0"
