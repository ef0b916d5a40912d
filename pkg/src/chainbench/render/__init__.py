"""Text and vector-image emitters."""
from __future__ import annotations

from .image import render_image
from .text import parse_state_text, render_text, state_block

__all__ = ["render_image", "render_text", "parse_state_text", "state_block"]
