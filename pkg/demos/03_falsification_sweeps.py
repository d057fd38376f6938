"""Try to break the uniqueness statements with random inputs."""
import numpy as np

from everett import build_model, random_basis_search
from everett.heisenberg import noncommuting_impossibility_check, rotated_contrast
from everett.report import random_recorded_operator

for m in (2, 3):
    model = build_model(m)
    for ensemble in ("haar", "structured"):
        res = random_basis_search(model, 500, seed=1, ensemble=ensemble)
        print(f"m={m} {ensemble:10s} satisfying={res.satisfying:4d} "
              f"equivalent={res.equivalent:4d} counterexamples={res.counterexamples}")

# any recorded apparatus observable picks out the pointer basis
rng = np.random.default_rng(5)
model = build_model(4)
worst = 0.0
for trial in range(50):
    d = random_recorded_operator(4, rng, 1e-6)
    rep = noncommuting_impossibility_check(model, model.pointer_operator(), d, seed=trial)
    worst = max(worst, rep.commutator_norm)
print("largest commutator with the pointer observable:", worst)
print("same for an observable diagonal in the Fourier basis:", rotated_contrast(model, model.pointer_operator()))
