"""Run directory layout and reproduction manifests."""

from .paths import RunPaths
from .service import RunManager
from .snapshots import ManifestRecord, ManifestWriter

__all__ = ["RunManager", "RunPaths", "ManifestRecord", "ManifestWriter"]
