"""
Pydantic models for pipeline records.
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field, field_validator, model_validator


class Label(str, Enum):
    """Sample class; the value order matches the network's class index."""
    BENIGN = "benign"
    MALICIOUS = "malicious"

    @property
    def index(self) -> int:
        return 0 if self is Label.BENIGN else 1

    @classmethod
    def from_index(cls, index: int) -> "Label":
        return cls.MALICIOUS if index == 1 else cls.BENIGN


class Split(str, Enum):
    TRAIN = "train"
    TEST = "test"


# Corpus

class ManifestRow(BaseModel):
    """One generated sample in a corpus manifest."""
    path: str = Field(..., min_length=1, description="Path relative to the manifest directory")
    family: str = Field(..., min_length=1)
    label: Label
    split: Split

    @field_validator("path", "family")
    @classmethod
    def validate_no_separator(cls, v):
        """Manifest fields are written to CSV without quoting."""
        if "," in v or "\n" in v:
            raise ValueError("manifest fields cannot contain commas or newlines")
        return v


# Scanning

class ScanVerdict(BaseModel):
    """Result of scanning one input."""
    path: str
    sha256: str = Field(..., min_length=64, max_length=64)
    probability: float = Field(..., ge=0.0, le=1.0, description="Malicious-class probability")
    threshold: float = Field(..., ge=0.0, le=1.0)
    verdict: Label
    encode_ms: float = Field(default=0.0, ge=0.0)
    infer_ms: float = Field(default=0.0, ge=0.0)
    source: str = Field(default="model", description="model or cache")

    @model_validator(mode="after")
    def validate_verdict(self):
        """Verdict is malicious iff probability >= threshold."""
        expected = Label.MALICIOUS if self.probability >= self.threshold else Label.BENIGN
        if self.verdict != expected:
            raise ValueError(f"verdict {self.verdict.value} disagrees with probability {self.probability}")
        return self

    @classmethod
    def decide(cls, probability: float, threshold: float, **kwargs) -> "ScanVerdict":
        verdict = Label.MALICIOUS if probability >= threshold else Label.BENIGN
        return cls(probability=probability, threshold=threshold, verdict=verdict, **kwargs)


class ScanFailure(BaseModel):
    """An input that could not be scanned."""
    path: str
    error_type: str
    message: str
    exit_code: int = Field(default=2, description="Exit code class of the error")


class KnownSample(BaseModel):
    """Cached verdict for a previously seen sample."""
    sha256: str
    probability: float = Field(..., ge=0.0, le=1.0)
    first_seen_path: Optional[str] = None
