"""
Numerical Core Package
======================

Pure numerical modules, organized bottom-up:
- qops: operator algebra and quantum-state primitives
- tomography: detector tomography and detector models
- decomposer: POVM decomposition and crosstalk / PPT checks
- mitigator: pre-processing and post-processing of readout
- witness: witness windows, purification and certification
- circuits: density-matrix simulator and device circuits

Nothing here reads files or touches the network; fixtures are loaded by
app.utils.fixtures.
"""

from app.quantum import circuits, decomposer, mitigator, qops, tomography, witness

__all__ = [
    "qops",
    "tomography",
    "decomposer",
    "mitigator",
    "witness",
    "circuits",
]
