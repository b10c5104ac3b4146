"""
向量丛层测试
"""
