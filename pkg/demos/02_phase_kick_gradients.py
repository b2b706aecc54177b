"""The feedforward / phase-kick / uncompute kernel as a gradient oracle.

A parameter register controls a computation; exponentiating the loss as a
phase and uncomputing writes -eta * dL/dPhi into the register's momentum.
This walkthrough reads the gradient of L(Phi) = Phi^2 from the momentum
shift and checks the kicking-rate scaling of the remainder.
"""

import numpy as np

from baqprop import (
    FeedforwardProgram,
    GateOp,
    GaussianPointer,
    LossSpec,
    QubitSpec,
    QuditSpec,
    product_gaussian_state,
    qfb_run,
    verify_eta_scaling,
)
from baqprop.qfb import _attach_compute

spec = QuditSpec(15, -4, 4)

# feedforward: copy the parameter into a compute register, score it there
program = FeedforwardProgram(
    gates=[GateOp("adder", src="theta", dst="work")],
    param_regs=["theta"], compute_regs=["work"],
    registers={"theta": spec, "work": spec})
loss = LossSpec(kind="diagonal_grid_function", targets=("work",),
                table=spec.values**2)

state = product_gaussian_state(["theta"], [spec],
                               [GaussianPointer(1.0, 0.0, 1.0)])
state = _attach_compute(state, program, None)
result = qfb_run(program, loss, eta=0.1, state=state)

print("loss L(Phi) = Phi^2 at the pointer mean Phi0 = 1:")
print("  momentum before:", result.momentum_before.round(4))
print("  momentum after: ", result.momentum_after.round(4))
print("  effective gradient:", result.effective_gradient.round(4),
      " (analytic 2*Phi0 = 2)")
print("  compute purity:", round(result.compute_purity, 12),
      " (classical embedding: exactly 1)")

# diagonal losses kick exactly linearly in eta; a non-diagonal Hermitian
# loss leaves an O(eta^2) remainder in the momentum shift
report = verify_eta_scaling(program, loss, [GaussianPointer(1.0, 0.0, 1.0)],
                            [0.4, 0.2, 0.1])
print("\ndiagonal kick, eta in {0.4, 0.2, 0.1}:")
print("  gradient slope variation:", f"{report.slope_variation:.2e}",
      " (first-order exact)")

x = np.array([[0, 1], [1, 0]], dtype=complex)
z = np.diag([1.0, -1.0]).astype(complex)
qprog = FeedforwardProgram(
    gates=[GateOp("param_exponential", src="theta", targets=("q",), matrix=x)],
    param_regs=["theta"], compute_regs=["q"],
    registers={"theta": QuditSpec(7, -3, 3), "q": QubitSpec()})
qloss = LossSpec(kind="hermitian_matrix", targets=("q",), matrix=0.5 * (z + x))
report = verify_eta_scaling(qprog, qloss, [GaussianPointer(1.0, 0.0, 1.0)],
                            [0.4, 0.2, 0.1, 0.05, 0.025])
print("non-diagonal Hermitian loss:")
print("  momentum-shift remainder exponent:", round(report.exponent, 2),
      " (second order)")
