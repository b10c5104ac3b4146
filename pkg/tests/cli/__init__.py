"""
命令行接口测试
"""
