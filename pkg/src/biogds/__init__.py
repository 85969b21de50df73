"""biogds: deterministic guided-distant-supervision corpus construction and
evaluation for biographical relation extraction."""

__version__ = "0.1.0"

from .labeller import Relation, RelationInstance  # noqa: F401
