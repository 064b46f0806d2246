"""Cost-effectiveness of the four SEIRS strategies.

Each strategy is optimised for its own functional, then priced under all
four. Strong dominance removes strategies that cost more for less effect;
the rest are compared through incremental and average cost-effectiveness
ratios.
"""
from epictrl import acer, icer
from epictrl.pipeline import run_pipeline
from epictrl.scenario import preset

cfg = preset("seirs-trawicki-2017")
run = run_pipeline(cfg)
print("assumed entries:", ", ".join(cfg.assumed))
print(f"{'strategy':8s} {'C1':>12s} {'C2':>12s} {'C3':>12s} {'C4':>12s} {'averted':>12s}")
for s in run.strategies:
    print(f"{s.label:8s} " + " ".join(f"{c:12.2f}" for c in s.costs) + f" {s.effectiveness:12.2f}")

kind = "LSD"
ranking = run.rankings[kind]
print(f"\nranking under C4 ({'cost only' if ranking.cost_only else 'dominance + ICER'})")
for row in ranking.rows:
    if row.dominated:
        note = f"dominated by {row.dominated_by}"
    elif row.icer is None:
        note = "least effective retained strategy"
    else:
        note = f"ICER against the next less effective strategy {row.icer:.2f}"
    print(f"  #{row.rank} {row.label}: ACER {row.acer:.4f}, {note}")

s = {x.label: x for x in run.strategies}
print(f"\nICER(QSD, LSD) = {icer(s['QSD'], s['LSD'], kind):.2f}")
print(f"ACER(LSD) = {acer(s['LSD'], kind):.4f} is the willingness-to-pay threshold of the first round")
