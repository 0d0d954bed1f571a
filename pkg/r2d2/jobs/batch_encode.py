"""
Batch encode job.
Encodes many APK/DEX inputs into <sha256-of-dex>.png files concurrently.
"""

import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Union

from pydantic import BaseModel

from r2d2.config import Settings, settings as default_settings
from r2d2.exceptions import InputError, R2D2Error
from r2d2.observability import logger
from r2d2.pixel import write_png
from r2d2.scan.pipeline import encode_path


class EncodedFile(BaseModel):
    """Outcome of encoding one input."""
    source: str
    output: Optional[str] = None
    sha256: Optional[str] = None
    width: int = 0
    height: int = 0
    error: Optional[str] = None


class BatchEncodeJob:
    """
    Encode inputs to PNG files named by the sha256 of their DEX payload.

    Responsibilities:
    - Encode inputs concurrently
    - Name outputs by content so duplicates collapse to one file
    - Report per-input failures without stopping the batch
    """

    def __init__(self, out_dir: Union[str, Path], settings: Optional[Settings] = None, workers: Optional[int] = None):
        """
        Initialize batch encode job.

        Args:
            out_dir: Directory receiving the PNG files
            settings: Width policy, strictness and PNG compression
            workers: Concurrent encodes (default: settings.scan_workers)
        """
        self.out_dir = Path(out_dir)
        self.settings = settings or default_settings
        self.workers = workers or self.settings.scan_workers
        self._claimed = set()
        self._lock = threading.Lock()

    def _claim(self, sha256: str) -> bool:
        """True for the first input seen with this digest."""
        with self._lock:
            if sha256 in self._claimed:
                return False
            self._claimed.add(sha256)
            return True

    def encode_one(self, source: str) -> EncodedFile:
        try:
            prepared = encode_path(source, self.settings.get_width(), self.settings.strict_dex)
            if prepared.kind == "png":
                raise InputError(f"{source} is already a PNG")
            output = self.out_dir / f"{prepared.sha256}.png"
            if self._claim(prepared.sha256):
                write_png(prepared.image, output, self.settings.png_compress_level)
        except R2D2Error as e:
            logger.warning("encode_failed", path=str(source), error_type=type(e).__name__, error=str(e))
            return EncodedFile(source=str(source), error=f"{type(e).__name__}: {e}")
        return EncodedFile(
            source=str(source),
            output=str(output),
            sha256=prepared.sha256,
            width=prepared.image.width,
            height=prepared.image.height,
        )

    def run(self, sources: Sequence[str]) -> List[EncodedFile]:
        """
        Encode every source; results are in input order.

        Raises:
            InputError: If the output directory cannot be created
        """
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise InputError(f"Cannot create {self.out_dir}: {e}") from e

        workers = max(1, min(self.workers, len(sources)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(self.encode_one, sources))

        logger.info(
            "batch_encode_completed",
            inputs=len(sources),
            failures=sum(r.error is not None for r in results),
            out_dir=str(self.out_dir),
        )
        return results
