"""Pattern databases with spurious-state and spurious-transition filtering."""
from __future__ import annotations

__version__ = "0.1.0"
