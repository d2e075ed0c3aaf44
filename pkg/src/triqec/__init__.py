"""Three-qubit error-correction simulator for a flux-tunable transmon/cavity device.

Layers:

* :mod:`triqec.core` -- dense complex linear algebra over composite Hilbert spaces
* :mod:`triqec.transmon` / :mod:`triqec.device` -- charge-basis transmon levels and
  the coupled qubits+cavity Hamiltonian, spectrum scans, avoided crossings
* :mod:`triqec.pulses` / :mod:`triqec.gatecal` -- time-domain flux schedules,
  unitary/Lindblad evolution, chevron scans and the calibrated three-qubit
  conditional-phase gate
* :mod:`triqec.gates` -- ideal gate algebra (diagonal phase gates, CCNot,
  encode/decode circuits)
* :mod:`triqec.tomo` -- state and process tomography in the Pauli basis
* :mod:`triqec.qec` -- bit-flip / phase-flip error-correction experiments
* :mod:`triqec.cli` -- command-line front end emitting CSV, JSON and figures
"""

__version__ = "0.1.0"
