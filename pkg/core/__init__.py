"""
Exact engine: integer matrices, abelian groups, the injection category,
truncated I-functors, P-modules, homological algebra and E2 pages.
"""
