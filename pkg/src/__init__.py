"""
HarlArena - многокомандное состязательное обучение с подкреплением
"""

__version__ = "0.1.0"
__author__ = "HarlArena Team"
