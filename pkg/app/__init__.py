"""
Readout Mitigator
=================

Toolkit for characterizing multi-qubit measurement noise (crosstalk
included), decomposing noisy POVM elements, mitigating readout errors with
local pre-processing plus classical post-processing, and certifying
entanglement with a two-sided witness.

Packages:
- quantum: numerical core (qops, tomography, decomposer, mitigator, witness, circuits)
- harness: experiment runs and reproductions of the published device data
- schemas: JSON shapes of every file and HTTP body
- routers: HTTP endpoints served by main.py
"""

__version__ = "1.0.0"
