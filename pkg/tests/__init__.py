"""tests包初始化"""
