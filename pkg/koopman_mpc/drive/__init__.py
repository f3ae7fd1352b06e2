from koopman_mpc.drive.machine import (
    continuous_derivative,
    euler_step,
    plant_step,
    system_matrix,
)
from koopman_mpc.drive.params import (
    DqState,
    DqVoltage,
    ElectricalAngle,
    MotorParams,
    OperatingCondition,
    SwitchState,
    VoltageVector,
    omega_el_from_rpm,
    reduce_angle,
)
from koopman_mpc.drive.transforms import (
    dq_to_abc,
    park_rotate,
    switch_to_alphabeta,
    vector_index_of,
    voltage_vectors,
)

__all__ = [
    "DqState",
    "DqVoltage",
    "ElectricalAngle",
    "MotorParams",
    "OperatingCondition",
    "SwitchState",
    "VoltageVector",
    "continuous_derivative",
    "dq_to_abc",
    "euler_step",
    "omega_el_from_rpm",
    "park_rotate",
    "plant_step",
    "reduce_angle",
    "switch_to_alphabeta",
    "system_matrix",
    "vector_index_of",
    "voltage_vectors",
]
