"""Scoring predicted maps: counting errors and map fidelity.

Counting quality is MAE plus the root-mean-square "MSE" over per-image
counts.  Map fidelity (PSNR, SSIM) tells degradations apart even when the
total count barely moves, so the two views complement each other; the
per-image squared-error losses are what a trainer would feed back.

Run:  python demos/04_evaluate_maps.py
"""

import numpy as np

from crowdmaps import (
    HeadAnnotation,
    ImageRect,
    MetricReport,
    combined_loss,
    count_from_map,
    geo_kernel_specs,
    mae_mse,
    map_euclidean_loss,
    psnr,
    render_anchors,
    render_density,
    ssim,
)

rng = np.random.default_rng(3)
rect = ImageRect(256, 256)

scenes = []
for _ in range(6):
    n = int(rng.integers(10, 80))
    pts = np.unique(rng.uniform(0, 255.9, size=(n, 2)), axis=0)
    scenes.append(HeadAnnotation(rect, pts))

gt_maps = [render_density(geo_kernel_specs(a), rect) for a in scenes]


def degrade(m, kind):
    if kind == "perfect":
        return m.copy()
    if kind == "noisy":
        return np.clip(m + rng.normal(0, 0.12 * m.max(), m.shape), 0, None)
    if kind == "undercount":
        return m * 0.8
    raise ValueError(kind)


reports = {}
print(f"{'prediction':12s} {'MAE':>8s} {'MSE':>8s} {'PSNR':>8s} {'SSIM':>7s}")
for kind in ("perfect", "noisy", "undercount"):
    preds = [degrade(m, kind) for m in gt_maps]
    est = [count_from_map(p) for p in preds]
    gt = [count_from_map(m) for m in gt_maps]
    mae, mse = mae_mse(est, gt)
    psnrs = [psnr(p, m) for p, m in zip(preds, gt_maps)]
    ssims = [ssim(p, m) for p, m in zip(preds, gt_maps)]
    mean_psnr = float("inf") if any(np.isinf(psnrs)) else float(np.mean(psnrs))
    report = MetricReport(mae=mae, mse=mse, n=len(scenes),
                          psnr=mean_psnr, ssim=float(np.mean(ssims)))
    reports[kind] = report
    psnr_str = "inf" if np.isinf(report.psnr) else f"{report.psnr:.2f}"
    print(f"{kind:12s} {report.mae:8.3f} {report.mse:8.3f} {psnr_str:>8s} {report.ssim:7.4f}")

# Training-style losses on one scene: density branch + anchor branch.
ann = scenes[0]
den_gt = gt_maps[0]
anc_gt = render_anchors(ann, sigma_anc=2.0)
den_pred = degrade(den_gt, "noisy")
anc_pred = degrade(anc_gt, "noisy")
l_den = map_euclidean_loss(den_pred, den_gt)
l_anc = map_euclidean_loss(anc_pred, anc_gt)
print(f"\nper-image squared-error losses: density {l_den:.4f}, anchor {l_anc:.4f}")
print(f"combined at omega = 0.5: {combined_loss(l_den, l_anc, 0.5):.4f}")
print("\nreport JSON for the noisy run:")
print(reports["noisy"].to_json())
