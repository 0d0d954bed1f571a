"""
Synthetic family specifications.

Spec files hold one family per line as whitespace-separated key=value
tokens; blank lines and lines starting with '#' are ignored:

    name=clean label=benign size=1024-4096 hist=20-5f:1 motifs=1a00,7010 freq=0.05 seed=1

hist is a comma list of lo-hi:weight hex byte ranges; motifs are hex strings.
"""

from pathlib import Path
from typing import List, Sequence, Tuple, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from r2d2.exceptions import CorpusError
from r2d2.models import Label


class ByteRange(BaseModel):
    """Inclusive byte-value range with a sampling weight."""
    lo: int = Field(..., ge=0, le=255)
    hi: int = Field(..., ge=0, le=255)
    weight: float = Field(default=1.0, gt=0.0)

    @model_validator(mode="after")
    def validate_order(self):
        if self.lo > self.hi:
            raise ValueError(f"byte range {self.lo:#x}-{self.hi:#x} is reversed")
        return self


class FamilySpec(BaseModel):
    """Generative description of one synthetic family."""
    name: str = Field(..., min_length=1)
    label: Label
    min_size: int = Field(default=1024, ge=0, description="Minimum body bytes after the header")
    max_size: int = Field(default=4096, ge=0)
    histogram: List[ByteRange] = Field(..., min_length=1)
    motifs: List[bytes] = Field(default_factory=list)
    frequency: float = Field(default=0.0, ge=0.0, le=1.0)
    seed: int = 0

    @field_validator("name")
    @classmethod
    def validate_name(cls, v):
        """Family names become directory names and manifest cells."""
        if not all(c.isalnum() or c in "-_" for c in v):
            raise ValueError("family name may only contain letters, digits, '-' and '_'")
        return v

    @field_validator("motifs")
    @classmethod
    def validate_motifs(cls, v):
        if any(len(m) == 0 for m in v):
            raise ValueError("motifs cannot be empty")
        return v

    @model_validator(mode="after")
    def validate_sizes(self):
        if self.min_size > self.max_size:
            raise ValueError(f"min_size {self.min_size} > max_size {self.max_size}")
        return self


def _parse_range(text: str) -> Tuple[int, int]:
    lo, _, hi = text.partition("-")
    return int(lo, 16), int(hi or lo, 16)


def parse_family_line(line: str) -> FamilySpec:
    """
    Parse one spec line.

    Raises:
        CorpusError: Unknown keys, malformed values or failed validation
    """
    fields = {}
    for token in line.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise CorpusError(f"Expected key=value, got {token!r}")
        fields[key.strip().lower()] = value.strip()

    unknown = set(fields) - {"name", "label", "size", "hist", "motifs", "freq", "seed"}
    if unknown:
        raise CorpusError(f"Unknown family keys: {sorted(unknown)}")

    try:
        data = {"name": fields.get("name", ""), "label": fields.get("label", "")}
        if "size" in fields:
            lo, _, hi = fields["size"].partition("-")
            data["min_size"], data["max_size"] = int(lo), int(hi or lo)
        data["histogram"] = []
        for part in filter(None, fields.get("hist", "").split(",")):
            span, _, weight = part.partition(":")
            lo, hi = _parse_range(span)
            data["histogram"].append({"lo": lo, "hi": hi, "weight": float(weight or 1.0)})
        data["motifs"] = [bytes.fromhex(m) for m in filter(None, fields.get("motifs", "").split(","))]
        if "freq" in fields:
            data["frequency"] = float(fields["freq"])
        if "seed" in fields:
            data["seed"] = int(fields["seed"])
        return FamilySpec(**data)
    except (ValidationError, ValueError) as e:
        raise CorpusError(f"Invalid family spec {line.strip()!r}: {e}") from e


def format_family_line(spec: FamilySpec) -> str:
    """Inverse of parse_family_line."""
    hist = ",".join(f"{r.lo:02x}-{r.hi:02x}:{r.weight:g}" for r in spec.histogram)
    tokens = [
        f"name={spec.name}",
        f"label={spec.label.value}",
        f"size={spec.min_size}-{spec.max_size}",
        f"hist={hist}",
    ]
    if spec.motifs:
        tokens.append("motifs=" + ",".join(m.hex() for m in spec.motifs))
    tokens += [f"freq={spec.frequency:g}", f"seed={spec.seed}"]
    return " ".join(tokens)


def parse_family_specs(text: str) -> List[FamilySpec]:
    specs = [
        parse_family_line(line)
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not specs:
        raise CorpusError("Family spec defines no families")
    names = [spec.name for spec in specs]
    if len(set(names)) != len(names):
        raise CorpusError(f"Duplicate family names: {names}")
    return specs


def load_family_specs(path: Union[str, Path]) -> List[FamilySpec]:
    """Read a family spec file."""
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as e:
        raise CorpusError(f"Cannot read family spec {path}: {e}") from e
    return parse_family_specs(text)


def write_family_specs(specs: Sequence[FamilySpec], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text("".join(format_family_line(spec) + "\n" for spec in specs))
    return path


def default_families() -> List[FamilySpec]:
    """Reference corpus: two families with disjoint dominant byte ranges."""
    return [
        FamilySpec(
            name="benign",
            label=Label.BENIGN,
            min_size=1024,
            max_size=4096,
            histogram=[ByteRange(lo=0x20, hi=0x5F)],
            motifs=[bytes.fromhex("1a000000"), bytes.fromhex("7010")],
            frequency=0.02,
            seed=1,
        ),
        FamilySpec(
            name="malicious",
            label=Label.MALICIOUS,
            min_size=1024,
            max_size=4096,
            histogram=[ByteRange(lo=0xA0, hi=0xDF)],
            motifs=[bytes.fromhex("6e20"), bytes.fromhex("0c00")],
            frequency=0.02,
            seed=2,
        ),
    ]
