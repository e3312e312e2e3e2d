"""chartforge: pictorial visualization authoring on a text-to-image backend."""

__version__ = "0.1.0"
