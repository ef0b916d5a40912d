"""Task families; importing this package registers all 42 tasks."""
from __future__ import annotations

from . import sequences  # noqa: F401
from . import graphs  # noqa: F401
from . import latin  # noqa: F401
from . import binary  # noqa: F401
from . import paths  # noqa: F401
from . import games  # noqa: F401
from . import words  # noqa: F401
