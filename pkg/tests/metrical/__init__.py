"""
度量丛层测试
"""
