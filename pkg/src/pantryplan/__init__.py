"""pantryplan: price-aware household meal planning.

Least-cost weekly diet planning as a linear program, price-shock detection
with substitution-graph re-planning, a rule-based agent orchestrator with an
HTTP API and CLI, and a reproducible simulation harness.
"""

__version__ = "0.1.0"
