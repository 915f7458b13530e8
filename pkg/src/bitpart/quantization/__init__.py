from bitpart.quantization.bounds import quantization_error_bound, quantization_error_bound_approx
from bitpart.quantization.codebook import (
    MAX_CODEBOOK_BITS,
    Codebook,
    QuantizedDirection,
    fidelities,
    generate_codebook,
    normalize,
    quantize,
    quantize_many,
)
