"""
场景工作流测试
"""
