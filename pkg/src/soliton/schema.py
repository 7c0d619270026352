import enum
import json
import typing

import pydantic


class System(str, enum.Enum):
    """
    Which right-hand side drives an integration.

    su2 is the full 7-equation phase system; u2, beta0 and so4 are its reductions
    on the L2 = L3, R1 = 0 and fully isotropic loci; slow is the 1/xi time change
    used near the conical end.
    """

    su2 = "su2"
    u2 = "u2"
    beta0 = "beta0"
    so4 = "so4"
    slow = "slow"


class TrajectoryEvent(str, enum.Enum):
    horizon = "horizon"  # t_max reached
    xi_floor = "xi_floor"  # xi crossed the stop level
    blow_up = "blow_up"  # norm ceiling or step-size underflow
    collapse = "collapse"  # some f_i^2 below the floor
    critical = "critical"  # inside the Einstein critical radius
    kahler_critical = "kahler_critical"  # inside the Kähler critical radius


class AsymptoticClass(str, enum.Enum):
    einstein = "EINSTEIN"
    conical = "CONICAL"
    kahler = "KAHLER"
    divergent = "DIVERGENT"
    undecided = "UNDECIDED"
    inadmissible = "INADMISSIBLE"  # outside the expander cone, not integrated


class ClosingKind(str, enum.Enum):
    fixed = "fixed"
    bolt = "bolt"
    bolt4 = "bolt4"


class KahlerVariant(str, enum.Enum):
    fixed = "fixed"
    bolt = "bolt"
    ke_n2 = "ke_n2"


class KahlerBoundaryKind(str, enum.Enum):
    vanishing = "vanishing"
    bolt_inc = "bolt_inc"
    bolt_dec = "bolt_dec"


class KahlerCase(str, enum.Enum):
    gaussian_c2 = "gaussian_c2"
    blowup_cp2 = "blowup_cp2"  # two cone angles on Bl_1(CP^2), n odd
    s2xs2 = "s2xs2"  # two cone angles on S^2 x S^2, n even
    cp2 = "cp2"  # one cone angle on CP^2
    o_minus_n = "o_minus_n"  # one cone angle on O(-n), complete


class BaseModel(pydantic.BaseModel):
    def to_primitive(self) -> typing.Any:
        return json.loads(self.model_dump_json())


class FrozenModel(BaseModel):
    model_config = pydantic.ConfigDict(frozen=True)
