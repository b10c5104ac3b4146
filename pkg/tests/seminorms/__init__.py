"""
半范数层测试
"""
