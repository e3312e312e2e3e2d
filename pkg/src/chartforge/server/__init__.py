"""Service layer: persistence, flow orchestration, HTTP API, CLI."""

from .flows import GenerateOptions, run_generation
from .store import GalleryEntry, Layer, Project, ProjectStore

__all__ = ["GalleryEntry", "GenerateOptions", "Layer", "Project", "ProjectStore", "run_generation"]
