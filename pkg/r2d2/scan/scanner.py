"""
Batch scanning.

Inputs are scanned concurrently, one task per file; results come back in
input order and a failing input only fails its own entry.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Union

from r2d2.config import Settings, settings as default_settings
from r2d2.exceptions import R2D2Error, exit_code_for
from r2d2.models import KnownSample, ScanFailure, ScanVerdict
from r2d2.nn import Network
from r2d2.observability import StageTimer, logger, record_verdict
from r2d2.scan.cache import KnownSampleCache
from r2d2.scan.pipeline import prepare_input


ScanResult = Union[ScanVerdict, ScanFailure]


class Scanner:
    """
    Classifies APK, DEX and PNG inputs with a trained network.

    Inference only reads the network parameters, so one network serves all
    worker threads.
    """

    def __init__(
        self,
        network: Network,
        settings: Optional[Settings] = None,
        threshold: Optional[float] = None,
        cache: Optional[KnownSampleCache] = None
    ):
        self.network = network
        self.settings = (settings or default_settings).model_copy(
            update={"input_size": network.config.input_size})
        self.threshold = self.settings.threshold if threshold is None else threshold
        self.cache = cache

    def scan_one(self, path: str) -> ScanVerdict:
        """
        Scan one input.

        Raises:
            InputError: If the input cannot be loaded or encoded
        """
        prepared = prepare_input(path, self.settings)

        if self.cache is not None:
            known = self.cache.get(prepared.sha256)
            if known is not None:
                verdict = ScanVerdict.decide(
                    known.probability, self.threshold,
                    path=str(path), sha256=prepared.sha256,
                    encode_ms=prepared.encode_ms, source="cache",
                )
                record_verdict(verdict.verdict.value, source="cache")
                return verdict

        with StageTimer("inference") as timer:
            probability = self.network.predict(prepared.image)
        verdict = ScanVerdict.decide(
            min(1.0, max(0.0, probability)), self.threshold,
            path=str(path),
            sha256=prepared.sha256,
            encode_ms=prepared.encode_ms,
            infer_ms=timer.elapsed_ms,
        )
        record_verdict(verdict.verdict.value)
        return verdict

    def _scan_safe(self, path: str) -> ScanResult:
        try:
            return self.scan_one(path)
        except R2D2Error as e:
            logger.warning("scan_failed", path=str(path), error_type=type(e).__name__, error=str(e))
            return ScanFailure(
                path=str(path),
                error_type=type(e).__name__,
                message=str(e),
                exit_code=exit_code_for(e),
            )

    def scan_many(self, paths: Sequence[str]) -> List[ScanResult]:
        """
        Scan inputs in parallel; results are in input order.

        New model verdicts are recorded in the cache (and saved) after the
        whole batch, in input order.
        """
        workers = max(1, min(self.settings.scan_workers, len(paths)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(self._scan_safe, paths))

        if self.cache is not None:
            for result in results:
                if isinstance(result, ScanVerdict) and result.source == "model":
                    self.cache.put(KnownSample(
                        sha256=result.sha256,
                        probability=result.probability,
                        first_seen_path=result.path,
                    ))
            self.cache.save()

        logger.info(
            "scan_completed",
            inputs=len(paths),
            failures=sum(isinstance(r, ScanFailure) for r in results),
        )
        return results
