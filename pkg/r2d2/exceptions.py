"""Exception hierarchy for the r2d2 pipeline."""


class R2D2Error(Exception):
    """Base exception for all r2d2 errors"""
    pass


class InputError(R2D2Error):
    """Input file or payload could not be used (CLI exit code 2)"""
    pass


class NumericError(R2D2Error):
    """Numeric failure such as NaN loss (CLI exit code 3)"""
    pass


# ============================================================================
# ARCHIVE
# ============================================================================

class ArchiveError(InputError):
    """ZIP/APK container could not be read"""
    pass


class NotZipError(ArchiveError):
    """No End-Of-Central-Directory record in the search window"""
    pass


class TruncatedArchiveError(ArchiveError):
    """Central directory or entry data extends past end of file"""
    pass


class CorruptArchiveError(ArchiveError):
    """Header signature or size fields are inconsistent"""
    pass


class EntryNotFoundError(ArchiveError):
    """Requested entry name is not in the archive index"""
    pass


class CrcMismatchError(ArchiveError):
    """CRC-32 of extracted data differs from the central directory"""
    pass


class UnsupportedMethodError(ArchiveError):
    """Compression method, encryption or zip64 not supported"""
    pass


class CorruptDeflateStreamError(ArchiveError):
    """Deflate payload could not be inflated to the declared size"""
    pass


class NoClassesDexError(ArchiveError):
    """Archive has no classes.dex entry"""
    pass


# ============================================================================
# DEX
# ============================================================================

class DexError(InputError):
    """Byte sequence is not an acceptable DEX file"""
    pass


class TooShortError(DexError):
    """Fewer bytes than a DEX header"""
    pass


class BadMagicError(DexError):
    """Leading bytes are not a supported DEX magic"""
    pass


class SizeMismatchError(DexError):
    """Header file_size differs from the actual length"""
    pass


class ChecksumMismatchError(DexError):
    """Adler-32 checksum differs (strict mode only)"""
    pass


class SignatureMismatchError(DexError):
    """SHA-1 signature differs (strict mode with signature check)"""
    pass


class BadHeaderError(DexError):
    """header_size or endian tag invalid (strict mode only)"""
    pass


# ============================================================================
# PIXEL
# ============================================================================

class PixelError(InputError):
    """Image encoding, decoding or PNG I/O failed"""
    pass


class EmptyInputError(PixelError):
    """Nothing to encode"""
    pass


class LengthOutOfRangeError(PixelError):
    """Requested byte length exceeds image capacity"""
    pass


class UnsupportedPngFormatError(PixelError):
    """PNG is not 8-bit RGB"""
    pass


class ImageIOError(PixelError):
    """PNG could not be read or written"""
    pass


# ============================================================================
# DISTANCE
# ============================================================================

class DistanceError(InputError):
    """Distance could not be computed"""
    pass


class DimensionMismatchError(DistanceError):
    """Images have different dimensions"""
    pass


# ============================================================================
# NETWORK
# ============================================================================

class NetworkError(R2D2Error):
    """Network construction, training or inference failed"""
    pass


class ShapeMismatchError(NetworkError):
    """Tensor shapes do not agree with the layer contract"""
    pass


class WrongInputSizeError(NetworkError, InputError):
    """Image does not match the network input size"""
    pass


class SingleClassDatasetError(NetworkError, InputError):
    """Training needs at least two classes"""
    pass


class DivergedLossError(NetworkError, NumericError):
    """Loss became NaN or infinite"""
    pass


class NonFiniteOutputError(NetworkError, NumericError):
    """Network produced a NaN or infinite probability"""
    pass


class CheckpointError(NetworkError, InputError):
    """Checkpoint file is malformed or fails its CRC"""
    pass


# ============================================================================
# EVALUATION / CORPUS
# ============================================================================

class EvaluationError(InputError):
    """Scores or thresholds are invalid"""
    pass


class CorpusError(InputError):
    """Family spec or manifest is malformed, or corpus I/O failed"""
    pass


# ============================================================================
# SCAN
# ============================================================================

class CacheError(InputError):
    """Known-sample cache file is unreadable or malformed"""
    pass


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def exit_code_for(error: BaseException) -> int:
    """CLI exit code class of an exception."""
    if isinstance(error, NumericError):
        return EXIT_NUMERIC
    if isinstance(error, R2D2Error):
        return EXIT_INPUT
    return EXIT_NUMERIC
