"""
Download and cache the SNAP temporal message datasets.

Downloads are recorded in a `manifest.json` next to the cached files with
their SHA-256 digest and size; every later cache hit is re-verified against
the manifest.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import requests

from ..exceptions import ChecksumMismatchError, DatasetError
from ..graph.graph_io import read_edge_file
from ..types import RawEventLog
from .config import default_cache_dir, offline_mode

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
CHUNK_SIZE = 1 << 16


@dataclass(frozen=True)
class DatasetInfo:
    """A known dataset and the sizes it is expected to parse to."""
    name: str
    url: str
    filename: str
    expected_nodes: int
    expected_events: int


DATASETS: Dict[str, DatasetInfo] = {
    "message": DatasetInfo(
        name="message",
        url="https://snap.stanford.edu/data/CollegeMsg.txt.gz",
        filename="CollegeMsg.txt.gz",
        expected_nodes=1899,
        expected_events=59835,
    ),
    "mail": DatasetInfo(
        name="mail",
        url="https://snap.stanford.edu/data/email-Eu-core-temporal.txt.gz",
        filename="email-Eu-core-temporal.txt.gz",
        expected_nodes=986,
        expected_events=332334,
    ),
}


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(CHUNK_SIZE), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _read_manifest(cache_dir: Path) -> Dict[str, Dict[str, object]]:
    path = cache_dir / MANIFEST_NAME
    if not path.exists():
        return {}
    try:
        with open(path, "r") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DatasetError(f"Cache manifest {path} is corrupt: {e}") from e


def _write_manifest(cache_dir: Path, manifest: Dict[str, Dict[str, object]]) -> None:
    with open(cache_dir / MANIFEST_NAME, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)


def _verify(path: Path, entry: Optional[Dict[str, object]], expected_sha256: Optional[str]) -> str:
    digest = sha256_of(path)
    if expected_sha256 and digest != expected_sha256.lower():
        raise ChecksumMismatchError(
            f"{path.name}: SHA-256 {digest} does not match the expected {expected_sha256}"
        )
    if entry is not None:
        if entry.get("size") != path.stat().st_size:
            raise ChecksumMismatchError(
                f"{path.name}: size {path.stat().st_size} differs from the recorded {entry.get('size')}"
            )
        if entry.get("sha256") != digest:
            raise ChecksumMismatchError(
                f"{path.name}: SHA-256 {digest} differs from the recorded {entry.get('sha256')}"
            )
    return digest


def _download(info: DatasetInfo, target: Path, timeout: float) -> None:
    partial = target.with_suffix(target.suffix + ".part")
    try:
        with requests.get(info.url, stream=True, timeout=timeout) as response:
            response.raise_for_status()
            with open(partial, "wb") as f:
                for chunk in response.iter_content(chunk_size=CHUNK_SIZE):
                    f.write(chunk)
    except requests.RequestException as e:
        partial.unlink(missing_ok=True)
        raise DatasetError(f"Could not download {info.name} from {info.url}: {e}") from e
    partial.replace(target)


def fetch_dataset(
    name: str,
    cache_dir: Optional[Union[str, Path]] = None,
    offline: Optional[bool] = None,
    expected_sha256: Optional[str] = None,
    timeout: float = 60.0,
) -> Path:
    """
    Return the local path of a dataset, downloading it on a cache miss.

    Args:
        name: "message" or "mail"
        cache_dir: Cache directory; defaults to $FMD_GAME_CACHE_DIR or ~/.cache/fmd_game
        offline: Never touch the network; defaults to $FMD_GAME_OFFLINE
        expected_sha256: Digest the file must have, enforced when given
        timeout: Per-request timeout in seconds

    Returns:
        Path to the cached (gzip) edge list

    Raises:
        DatasetError: unknown name, network failure without a cached copy,
            or a cache miss in offline mode
        ChecksumMismatchError: the file does not match the manifest or the expected digest
    """
    if name not in DATASETS:
        raise DatasetError(f"Unknown dataset {name!r}; choose from {sorted(DATASETS)}")
    info = DATASETS[name]
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    offline = offline_mode() if offline is None else offline
    target = cache / info.filename
    manifest = _read_manifest(cache) if cache.exists() else {}

    if target.exists():
        entry = manifest.get(info.filename)
        digest = _verify(target, entry, expected_sha256)
        if entry is None:
            # placed by hand; trust it from now on
            manifest[info.filename] = {"sha256": digest, "size": target.stat().st_size, "url": info.url}
            _write_manifest(cache, manifest)
        logger.info("Cache hit for %s: %s", name, target)
        return target
    if offline:
        raise DatasetError(f"Dataset {name} is not cached in {cache} and offline mode is on")

    cache.mkdir(parents=True, exist_ok=True)
    logger.info("Downloading %s from %s", name, info.url)
    _download(info, target, timeout)
    try:
        digest = _verify(target, None, expected_sha256)
    except ChecksumMismatchError:
        target.unlink(missing_ok=True)
        raise
    manifest[info.filename] = {"sha256": digest, "size": target.stat().st_size, "url": info.url}
    _write_manifest(cache, manifest)
    logger.info("Cached %s (%d bytes, sha256 %s)", target, target.stat().st_size, digest)
    return target


def load_event_log(
    source: str,
    cache_dir: Optional[Union[str, Path]] = None,
    offline: Optional[bool] = None,
) -> RawEventLog:
    """
    Parse a dataset given by name ("message", "mail") or by file path.

    Known datasets are compared against their published node and event
    counts; deviations are logged, not raised.
    """
    info = DATASETS.get(source)
    if info is None:
        path = Path(source)
        if not path.exists():
            raise DatasetError(f"Dataset file not found: {path}")
        return read_edge_file(path)

    log = read_edge_file(fetch_dataset(source, cache_dir=cache_dir, offline=offline))
    nodes = len(log.labels)
    if len(log) != info.expected_events or nodes != info.expected_nodes:
        logger.warning(
            "%s parsed to %d nodes / %d events, expected %d / %d",
            source, nodes, len(log), info.expected_nodes, info.expected_events,
        )
    return log
