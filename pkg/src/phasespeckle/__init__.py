"""Phase-encoded RGB speckle toolkit for active stereo 3D reconstruction.

Pipeline stages, each importable on its own:

    pattern    RGB phase-speckle projector pattern generation
    ppn        capture -> wrapped phase + modulation mask (illumination invariant)
    simulate   synthetic rectified stereo renderer with exact ground truth
    graycode   Gray-code stacks and stereo ground truth from decoded coordinates
    matching   windowed SSD block matcher over rgb or phase features
    metrics    EPE / D1 evaluation and comparison tables
    recon      disparity triangulation and PLY export
    imgcore    image containers and PNG / PFM / PLY I/O
"""

from .imgcore import (
    DisparityMap,
    GrayImage,
    PfmFormatError,
    PngDecodeError,
    RgbImage,
    ValidityMask,
    read_pfm,
    read_png,
    write_pfm,
    write_ply,
    write_png,
)
from .pattern import (
    PatternParams,
    Permutation,
    PhaseField,
    compose_rgb,
    gen_base_phase,
    gen_permutation,
    gen_speckle_pattern,
    scramble,
    upsample_block,
    wrap_phase,
)
from .ppn import PpnResult, channel_permute_decode, decode, decode_pair
from .simulate import Layer, RenderOutput, RigSpec, SceneSpec, perturb, preset_scene, render
from .graycode import (
    CoordMap,
    GraycodeStack,
    decode_stack,
    gen_stack,
    gray_decode,
    gray_encode,
    gt_from_stereo,
)
from .matching import MatchParams, embed_phase, features_rgb, lr_check, match, match_pair
from .metrics import EmptyEvaluationError, EvalReport, compare_csv, compare_table, evaluate
from .recon import PointCloud, triangulate

__version__ = "0.1.0"
