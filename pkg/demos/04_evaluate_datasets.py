"""
Comparing two datasets
======================

Per-file features, intra-set and inter-set distances, kernel density
estimates, overlap area and KL divergence, then one SVG per feature.
"""
import tempfile
from pathlib import Path

from notemesh.eval import cross_validate
from notemesh.render import render_pdf_svg

CORPUS = Path(__file__).resolve().parent.parent / "tests" / "data" / "corpus"

report = cross_validate(CORPUS / "set_a", CORPUS / "set_b", ["pch", "pr", "nc", "nlh"])
print(f"{report.n_a} files against {report.n_b} files")
for kind, r in report.features.items():
    print(f"{kind.value:4s} OA(A, inter)={r.oa_a_inter:.3f} KLD(A, inter)={r.kld_a_inter:.3f}"
          f"  OA(B, inter)={r.oa_b_inter:.3f} KLD(B, inter)={r.kld_b_inter:.3f}")

out = Path(tempfile.mkdtemp(prefix="notemesh-"))
for kind, r in report.features.items():
    (out / f"{kind.value}.svg").write_text(render_pdf_svg(r))
(out / "report.json").write_text(report.to_json(indent=1))
print("plots and report in", out)
