"""Phase-space points of the Lorenz and Lorenz-Stenflo systems with a frame tag."""
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .exceptions import FrameError

ArrayLike = Union[float, np.ndarray]


class Frame(str, Enum):
    ORIGINAL = "original"
    RESCALED = "rescaled"


@dataclass(frozen=True)
class State3:
    """
    Point (or sampled curve, when components are arrays) of a three-dimensional system.

    Components are (X, Y, Z) in the original frame and (xi, eta, zeta) in the
    rescaled frame; accessors for the wrong frame raise FrameError.
    """

    x: ArrayLike
    y: ArrayLike
    z: ArrayLike
    frame: Frame = Frame.RESCALED

    def __post_init__(self):
        if not isinstance(self.frame, Frame):
            object.__setattr__(self, "frame", Frame(self.frame))

    def require(self, frame: Frame) -> "State3":
        if self.frame is not frame:
            raise FrameError(f"expected a {frame.value}-frame state, got {self.frame.value}")
        return self

    @property
    def xi(self) -> ArrayLike:
        return self.require(Frame.RESCALED).x

    @property
    def eta(self) -> ArrayLike:
        return self.require(Frame.RESCALED).y

    @property
    def zeta(self) -> ArrayLike:
        return self.require(Frame.RESCALED).z

    @property
    def X(self) -> ArrayLike:
        return self.require(Frame.ORIGINAL).x

    @property
    def Y(self) -> ArrayLike:
        return self.require(Frame.ORIGINAL).y

    @property
    def Z(self) -> ArrayLike:
        return self.require(Frame.ORIGINAL).z

    @property
    def dimension(self) -> int:
        return 3

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, values, frame: Frame = Frame.RESCALED) -> "State3":
        values = np.asarray(values, dtype=float)
        if values.shape[0] != 3:
            raise ValueError(f"State3 needs 3 components, got {values.shape[0]}")
        return cls(values[0], values[1], values[2], frame)


@dataclass(frozen=True)
class State4(State3):
    """State3 plus the second velocity mode: V (original) or chi (rescaled)."""

    v: ArrayLike = 0.0

    @property
    def V(self) -> ArrayLike:
        return self.require(Frame.ORIGINAL).v

    @property
    def chi(self) -> ArrayLike:
        return self.require(Frame.RESCALED).v

    @property
    def dimension(self) -> int:
        return 4

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.v], dtype=float)

    def lorenz_part(self) -> State3:
        return State3(self.x, self.y, self.z, self.frame)

    @classmethod
    def from_array(cls, values, frame: Frame = Frame.RESCALED) -> "State4":
        values = np.asarray(values, dtype=float)
        if values.shape[0] != 4:
            raise ValueError(f"State4 needs 4 components, got {values.shape[0]}")
        return cls(values[0], values[1], values[2], frame, values[3])


def state_from_array(values, frame: Frame = Frame.RESCALED) -> State3:
    """State3 or State4 depending on the number of components."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] == 4:
        return State4.from_array(values, frame)
    return State3.from_array(values, frame)


def reflect(s: State3) -> State3:
    """The symmetry (x, y, z[, v]) -> (-x, -y, z[, -v])."""
    if isinstance(s, State4):
        return State4(-s.x, -s.y, s.z, s.frame, -s.v)
    return State3(-s.x, -s.y, s.z, s.frame)
