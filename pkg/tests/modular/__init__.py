"""
模隧道层测试
"""
