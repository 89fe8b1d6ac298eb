"""
subtree-bounds - junction-tree inference and sub-tree lower bounds on ln Z
"""

__version__ = "1.0.1"
__author__ = "Subtree Bounds Team"
