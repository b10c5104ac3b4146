"""
量子紧度量空间层测试
"""
