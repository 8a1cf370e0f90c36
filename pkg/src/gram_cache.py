"""On-disk cache of H^s Gram matrices, reused across CLI invocations."""

import json
from pathlib import Path
from typing import Any, Dict, Optional

from .basis import BasisSpec, GramMatrix, gram_from_matrix, gram_hs
from .errors import MFEError
from .storage import load_bundle, save_bundle

CACHE_VERSION = 1


class GramCache:
    """Manages cached Gram matrices keyed by (family, n, d, s)."""

    def __init__(self, cache_dir: str = "cache"):
        self.cache_dir = Path(cache_dir)
        self.gram_dir = self.cache_dir / "gram"
        self.manifest_path = self.cache_dir / "cache_manifest.json"
        self.hits = 0
        self.misses = 0

        # Create cache directories
        self.gram_dir.mkdir(parents=True, exist_ok=True)

        # Load or create manifest
        self.manifest = self._load_manifest()

    def _load_manifest(self) -> Dict[str, Any]:
        """Load the cache manifest or create empty one."""
        if self.manifest_path.exists():
            try:
                with open(self.manifest_path, "r") as f:
                    return json.load(f)
            except (json.JSONDecodeError, IOError):
                return {}
        return {}

    def _save_manifest(self):
        """Save the manifest to disk."""
        with open(self.manifest_path, "w") as f:
            json.dump(self.manifest, f, indent=2, sort_keys=True)

    @staticmethod
    def _get_cache_key(spec: BasisSpec, s: int) -> str:
        return f"{spec.family.value}_n{spec.n}_d{spec.d}_s{s}"

    def _get_cache_path(self, cache_key: str) -> Path:
        return self.gram_dir / f"{cache_key}.bin"

    def is_cached(self, spec: BasisSpec, s: int) -> bool:
        """Check if a current-version entry and its file exist."""
        cache_key = self._get_cache_key(spec, s)
        entry = self.manifest.get(cache_key)
        if entry is None or entry.get("version") != CACHE_VERSION:
            return False
        return self._get_cache_path(cache_key).exists()

    def get_cached(self, spec: BasisSpec, s: int) -> Optional[GramMatrix]:
        """Cached Gram matrix, or None when missing or unreadable."""
        if not self.is_cached(spec, s):
            return None
        cache_key = self._get_cache_key(spec, s)
        try:
            _, arrays = load_bundle(self._get_cache_path(cache_key), expected_kind="gram")
            return gram_from_matrix(spec, s, arrays["matrix"])
        except (MFEError, OSError, KeyError):
            # Drop entries whose file is corrupt
            del self.manifest[cache_key]
            self._save_manifest()
            return None

    def save(self, gram: GramMatrix):
        cache_key = self._get_cache_key(gram.spec, gram.s)
        cache_path = self._get_cache_path(cache_key)
        save_bundle(
            cache_path,
            "gram",
            {"matrix": gram.matrix},
            {"basis": gram.spec.to_dict(), "s": gram.s},
        )
        self.manifest[cache_key] = {
            "family": gram.spec.family.value,
            "n": gram.spec.n,
            "d": gram.spec.d,
            "s": gram.s,
            "version": CACHE_VERSION,
            "file": str(cache_path.relative_to(self.cache_dir)),
        }
        self._save_manifest()

    def get(self, spec: BasisSpec, s: int) -> GramMatrix:
        """Cached Gram matrix, assembling and storing it on a miss."""
        gram = self.get_cached(spec, s)
        if gram is not None:
            self.hits += 1
            return gram
        self.misses += 1
        gram = gram_hs(spec, s)
        self.save(gram)
        return gram

    __call__ = get

    def clear_all(self):
        """Clear all cache entries."""
        for gram_file in self.gram_dir.glob("*.bin"):
            gram_file.unlink()

        self.manifest = {}
        self._save_manifest()

        print("✓ Cleared all cache entries")

    def get_stats(self) -> Dict[str, Any]:
        """Get cache statistics."""
        total_entries = len(self.manifest)
        valid_entries = sum(
            1 for key in self.manifest if self._get_cache_path(key).exists()
        )
        total_size = sum(
            self._get_cache_path(k).stat().st_size
            for k in self.manifest
            if self._get_cache_path(k).exists()
        )

        return {
            "total_entries": total_entries,
            "valid_entries": valid_entries,
            "missing_entries": total_entries - valid_entries,
            "total_size_bytes": total_size,
            "total_size_mb": round(total_size / 1024 / 1024, 2),
        }
