"""
Deterministic synthetic corpus of labelled DEX samples.
"""

from r2d2.corpus.families import (
    ByteRange,
    FamilySpec,
    parse_family_line,
    format_family_line,
    parse_family_specs,
    load_family_specs,
    write_family_specs,
    default_families,
)
from r2d2.corpus.generator import build_dex, generate_body, generate_sample
from r2d2.corpus.manifest import (
    MANIFEST_NAME,
    SPEC_NAME,
    assign_splits,
    generate_corpus,
    write_manifest,
    read_manifest,
    resolve,
    load_split,
)

__all__ = [
    'ByteRange',
    'FamilySpec',
    'parse_family_line',
    'format_family_line',
    'parse_family_specs',
    'load_family_specs',
    'write_family_specs',
    'default_families',
    'build_dex',
    'generate_body',
    'generate_sample',
    'MANIFEST_NAME',
    'SPEC_NAME',
    'assign_splits',
    'generate_corpus',
    'write_manifest',
    'read_manifest',
    'resolve',
    'load_split',
]
