"""From a predicted anchor map back to individual head detections.

A network would predict the anchor map; here we fake one by rendering the
ground truth and adding noise.  Post-processing then thresholds the noise
away, extracts peaks with non-maximum suppression, and sizes a box for
each surviving anchor from the spacing of its detected neighbors.

Run:  python demos/03_detection_pipeline.py
"""

from pathlib import Path

import numpy as np

from crowdmaps import (
    GeoParams,
    HeadAnnotation,
    ImageRect,
    PostprocessParams,
    estimate_boxes,
    extract_anchors,
    render_anchors,
    write_png,
)

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

rng = np.random.default_rng(11)
rect = ImageRect(400, 300)

# Heads at least 20 px apart so every one is individually resolvable.
points = []
while len(points) < 35:
    cand = rng.uniform(5, [rect.width - 5, rect.height - 5])
    if all(np.hypot(*(cand - p)) >= 20 for p in points):
        points.append(cand)
ann = HeadAnnotation(rect, np.array(points))

anchor_gt = render_anchors(ann, sigma_anc=2.0)
noise = np.abs(rng.normal(0.0, 0.0015, size=anchor_gt.shape))
predicted = anchor_gt + noise  # a stand-in for a network's output
print(f"predicted anchor map: {len(ann)} planted heads, noise floor {noise.max():.4f}")

params = PostprocessParams(
    threshold=0.2 * float(predicted.max()),
    nms_radius=3.0,
    box_scale=2.0,
)
detections = extract_anchors(predicted, params)
print(f"threshold {params.threshold:.4f} -> {len(detections)} detections")

detections = estimate_boxes(
    detections, [(d.x, d.y) for d in detections], GeoParams(beta=0.3, m=3), params.box_scale
)

# How close did we land to the planted heads?
found = np.array([[d.x, d.y] for d in detections])
errs = [np.sqrt(((found - p) ** 2).sum(axis=1)).min() for p in ann.points]
print(f"localization error: mean {np.mean(errs):.2f} px, max {np.max(errs):.2f} px")
sides = [d.box[2] for d in detections]
print(f"box sides: min {min(sides):.1f}, median {np.median(sides):.1f}, max {max(sides):.1f} px")

# Overlay: anchor map plus box outlines.
canvas = predicted / predicted.max()
for d in detections:
    x, y, w, h = d.box
    x0, x1 = int(np.clip(round(x), 0, rect.width - 1)), int(np.clip(round(x + w), 0, rect.width - 1))
    y0, y1 = int(np.clip(round(y), 0, rect.height - 1)), int(np.clip(round(y + h), 0, rect.height - 1))
    canvas[y0, x0:x1 + 1] = 1.0
    canvas[y1, x0:x1 + 1] = 1.0
    canvas[y0:y1 + 1, x0] = 1.0
    canvas[y0:y1 + 1, x1] = 1.0
write_png(OUT / "detections.png", canvas, colormap="gray")
print(f"wrote {OUT / 'detections.png'}")
