"""Vector image of an instance (SVG bytes)."""
from __future__ import annotations

from ..core import TaskInstance, get_task
from .svg import MARGIN, Canvas


def render_image(instance: TaskInstance) -> bytes:
    spec = get_task(instance.task)
    cv = spec.draw(instance.initial_state) if spec.draw else None
    if cv is None:
        # fallback: a caption-only card, still deterministic
        cv = Canvas(2 * MARGIN + 480, 2 * MARGIN + 48)
        cv.text(MARGIN, MARGIN + 24, spec.title, size=20, anchor="start")
    return cv.to_svg()
