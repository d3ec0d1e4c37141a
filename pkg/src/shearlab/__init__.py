"""Shear space and umbilical space of spacelike submanifolds.

Typical use::

    from shearlab import specfile, classify_at
    spec = specfile.load("sphere.spec")
    report = classify_at(spec.immersion, spec.samples()[0])
    report.d, report.m, report.label
"""

from .expr import Expression, Jet2, eval_jet2, evaluate, parse, to_string
from .immersion import ImmersionSpec, PointFrameData, frame_at, normal_project, tangent_project
from .semiriemann import AmbientManifold, MetricValue, christoffel, metric_at
from .shear import (
    ExtrinsicData,
    ScanResult,
    ShearReport,
    classify,
    classify_at,
    constancy_scan,
    extrinsic,
    mean_curvature,
    operator_rank,
    second_fundamental_form,
    shear_operator,
    shear_space,
    total_shear,
    umbilical_space,
    wedge_rank_oracle,
    weingarten_operator,
)
from .tolerances import Tolerances

__version__ = "0.1.0"
