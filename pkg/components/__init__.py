"""
Report components for the tamemod CLI.
"""

from components.reports import Report, RunConfig

__all__ = [
    'Report',
    'RunConfig',
]
