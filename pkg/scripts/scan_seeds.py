"""Scan optimizer seeds/policies for the desk-scale end-to-end runs."""
import json
import sys

from tdslip import load_default_catalog
from tdslip.evaluation import Evaluator, NoiseSpec, design_search_space
from tdslip.mdpso import SwarmConfig, optimize
from tdslip.sim import SimConfig

cat = load_default_catalog()
space = design_search_space()
out = []
for case in (1, 2):
    for policy in ("per_iteration", "per_particle"):
        for seed in range(1, 17):
            ev = Evaluator(case_id=case, noise=NoiseSpec(seed=3), catalog=cat,
                           sim_config=SimConfig(max_cycles=10), draw_policy=policy)
            cfg = SwarmConfig(population=32, inertia=0.6, cognitive=1.7, social=1.7,
                              velocity_clamp=0.3, max_iterations=100, seed=seed)
            res = optimize(space, ev, cfg, workers=2)
            bf = res.best_fitness
            rec = dict(case=case, policy=policy, seed=seed, iters=res.iterations,
                       reason=res.termination_reason, feasible=bool(res.feasible),
                       violation=float(bf.net_violation), objective=float(bf.objective),
                       x=[float(v) for v in res.best_position])
            out.append(rec)
            print(json.dumps({k: v for k, v in rec.items() if k != "x"}), flush=True)
            with open("scripts/scan_results2.json", "w") as fh:
                json.dump(out, fh, indent=1)
print("done")
