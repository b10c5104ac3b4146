"""
数值内核测试
"""
