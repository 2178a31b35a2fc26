"""Run-directory services for reachest."""

from .file_manager import FileManager
from .plotter import Plotter

__all__ = [
    "FileManager",
    "Plotter",
]
