"""Named clustering configurations and the ``(a).(b).(c)`` naming scheme.

``(a)`` is the method (``single``, ``complete``, ``average``, ``centroid``,
``ward.D2``, ``kmeans``, ``kkmeans``, ``spc``), ``(b).(c)`` the index
combination, e.g. ``kmeans._dd2.MEI`` or ``ward.D2._.EIHI``. The geometry
or kernel that tells apart rows sharing a name is carried separately as
the variant (``kmeans`` + ``mahalanobis``, ``kkmeans`` + ``polynomial``...).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InvalidArgument
from ..indexes import ComboSpec
from .base import Partition
from .hierarchical import LinkageKind, hclust
from .kernels import KernelSpec
from .kmeans import InitKind, kkmeans, kmeans
from .spectral import spectral_cluster

METHOD_NAMES = ("single", "complete", "average", "centroid", "ward.D2",
                "kmeans", "kkmeans", "spc")
_HIER = {lk.value for lk in LinkageKind}
_VARIANTS = {
    "kmeans": ("euclidean", "mahalanobis"),
    "kkmeans": ("gaussian", "polynomial", "linear"),
    "spc": ("gaussian", "polynomial", "linear"),
}


@dataclass(frozen=True)
class MethodSpec:
    name: str
    variant: str = ""
    init: str = "kmeansPlusPlus"
    kernel_params: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.name not in METHOD_NAMES:
            raise InvalidArgument(f"unknown method {self.name!r}")
        allowed = _VARIANTS.get(self.name, ("euclidean",))
        variant = self.variant or allowed[0]
        if variant not in allowed:
            raise InvalidArgument(f"method {self.name!r} has no variant {variant!r}")
        object.__setattr__(self, "variant", variant)
        InitKind(self.init)

    @classmethod
    def parse(cls, text: str) -> "MethodSpec":
        """Parse ``name``, ``name:variant`` or ``name:variant:init``."""
        parts = text.strip().split(":")
        if len(parts) > 3:
            raise InvalidArgument(f"cannot parse method {text!r}")
        return cls(*parts)

    @property
    def key(self) -> str:
        k = f"{self.name}:{self.variant}"
        if self.init != "kmeansPlusPlus":
            k += f":{self.init}"
        return k

    def kernel(self) -> KernelSpec:
        kind = self.variant
        params = dict(self.kernel_params)
        if kind == "gaussian":
            return KernelSpec.gaussian(params.get("sigma"))
        if kind == "polynomial":
            return KernelSpec.polynomial(params.get("degree", 2), params.get("scale", 1.0),
                                         params.get("offset", 1.0))
        return KernelSpec.linear()

    def run(self, X, k: int, seed=None) -> Partition:
        if self.name in _HIER:
            return hclust(X, k, self.name)
        if self.name == "kmeans":
            return kmeans(X, k, init=self.init, metric=self.variant, seed=seed)
        if self.name == "kkmeans":
            return kkmeans(X, k, self.kernel(), init=self.init, seed=seed)
        return spectral_cluster(X, k, self.kernel(), seed=seed)


def default_methods(kernel_params=None) -> list[MethodSpec]:
    kp = dict(kernel_params or {})
    specs = [MethodSpec(lk.value) for lk in LinkageKind]
    specs += [MethodSpec("kmeans", "euclidean"), MethodSpec("kmeans", "mahalanobis"),
              MethodSpec("kkmeans", "gaussian", kernel_params=kp),
              MethodSpec("kkmeans", "polynomial", kernel_params=kp),
              MethodSpec("spc", "gaussian", kernel_params=kp)]
    return specs


def format_method_name(method, combo) -> str:
    name = method.name if isinstance(method, MethodSpec) else str(method)
    return f"{name}.{combo}"


def parse_method_name(text: str) -> tuple[str, ComboSpec]:
    """Split ``'ward.D2._d.MEI'`` into ``('ward.D2', ComboSpec('_d.MEI'))``."""
    parts = text.strip().split(".")
    if len(parts) < 3:
        raise InvalidArgument(f"cannot parse method name {text!r}")
    name = ".".join(parts[:-2])
    if name not in METHOD_NAMES:
        raise InvalidArgument(f"unknown method {name!r} in {text!r}")
    return name, ComboSpec.parse(".".join(parts[-2:]))
