"""Principal bundles, pull-backs, connections and homotopy-induced bundle isomorphisms."""
from __future__ import annotations

__version__ = "0.1.0"
