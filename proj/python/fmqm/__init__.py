"""Field-based quality metric for textured meshes."""

from ._fmqm import (
    FmqmError,
    FmqmInvalidArgument,
    FmqmIoError,
    FmqmNumericError,
    FmqmParseError,
    Mesh,
    compare,
    compare_files,
    default_config,
    downsample_texture,
    evaluate,
    gaussian_noise,
    load_mesh,
    pearson,
    primitives,
    quantize,
    save_mesh,
    spearman,
    surface_area,
)

__all__ = [
    "FmqmError",
    "FmqmInvalidArgument",
    "FmqmIoError",
    "FmqmNumericError",
    "FmqmParseError",
    "Mesh",
    "compare",
    "compare_files",
    "default_config",
    "downsample_texture",
    "evaluate",
    "gaussian_noise",
    "load_mesh",
    "pearson",
    "primitives",
    "quantize",
    "save_mesh",
    "spearman",
    "surface_area",
]
