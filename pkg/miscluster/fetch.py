"""Download benchmark files listed in a manifest. Only the CLI calls this."""
import time
from pathlib import Path
from typing import List, Optional, Sequence

import requests
from loguru import logger
from pydantic import BaseModel

from miscluster import __version__
from miscluster.errors import InputError
from miscluster.ingest import Manifest, ManifestEntry

HEADERS = {"User-Agent": f"miscluster/{__version__}"}
TIMEOUT = 60
ATTEMPTS = 4


class FetchOutcome(BaseModel):
    dataset: str
    path: str
    status: str  # 'downloaded', 'present', 'failed'
    error: Optional[str] = None


def _download(url: str, path: Path) -> None:
    last_error = None
    for attempt in range(ATTEMPTS):
        try:
            response = requests.get(url, headers=HEADERS, timeout=TIMEOUT)
            if response.status_code == 200:
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(path.suffix + ".part")
                tmp.write_bytes(response.content)
                tmp.replace(path)
                return
            last_error = f"HTTP {response.status_code}"
            if response.status_code != 429:
                break
        except requests.RequestException as e:
            last_error = str(e)
        time.sleep(2**attempt * 0.5)
    raise InputError(f"could not download {url}: {last_error}")


def fetch_entry(manifest: Manifest, entry: ManifestEntry, force: bool = False) -> FetchOutcome:
    path = manifest.path_of(entry)
    if path.is_file() and not force:
        return FetchOutcome(dataset=entry.name, path=str(path), status="present")
    if not entry.url:
        return FetchOutcome(dataset=entry.name, path=str(path), status="failed", error="no url in manifest")
    try:
        _download(entry.url, path)
    except InputError as e:
        logger.warning("download failed", dataset=entry.name, url=entry.url, error=str(e))
        return FetchOutcome(dataset=entry.name, path=str(path), status="failed", error=str(e))
    logger.info("dataset downloaded", dataset=entry.name, path=str(path))
    return FetchOutcome(dataset=entry.name, path=str(path), status="downloaded")


def fetch_datasets(manifest: Manifest, names: Optional[Sequence[str]] = None, force: bool = False) -> List[FetchOutcome]:
    entries = [manifest.entry(n) for n in names] if names else list(manifest.datasets)
    return [fetch_entry(manifest, entry, force=force) for entry in entries]
