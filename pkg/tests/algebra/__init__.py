"""
有限维 C*-代数层测试
"""
