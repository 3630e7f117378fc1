from .result import AltMinOptions, DecodeResult, InitKind, Outcome, relative_error
from .decoders import decode_altmin, decode_enumerate, decode_sparse_factor, enumeration_size
from .probe import ProbeResult, injectivity_probe
