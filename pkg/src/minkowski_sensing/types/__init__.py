from .path import ExpandedPath, expand_paths

__all__ = ["ExpandedPath", "expand_paths"]
