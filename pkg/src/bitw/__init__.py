"""BiTW: ecological diversity texture features over color channels and wavelet subbands."""

from .descriptor import FeatureVector, extract_bitw, feature_count, feature_names, quantize_subband
from .dwt import WaveletConfig, decompose_pyramid, dwt2_single_level, idwt2_single_level
from .eco import biodiversity_vector, histogram
from .raster import load_image, scan_dataset, split_channels
from .taxo import taxonomic_vector

__all__ = [
    "FeatureVector",
    "WaveletConfig",
    "biodiversity_vector",
    "decompose_pyramid",
    "dwt2_single_level",
    "extract_bitw",
    "feature_count",
    "feature_names",
    "histogram",
    "idwt2_single_level",
    "load_image",
    "quantize_subband",
    "scan_dataset",
    "split_channels",
    "taxonomic_vector",
]
