"""
Tracking a target through a partial occlusion
=============================================

A static textured target has its left half covered by block noise from
frame 30 on.  We follow the learned fragment weights: the covered column
should end up trusted less than the visible one.
"""
import numpy as np

from drtrack import Occlusion, SynthSpec, TrackConfig, generate, track_sequence
from drtrack.evaluation import make_records, ope_metrics

spec = SynthSpec(length=60, seed=3, occlusions=(Occlusion((0, 0, 0.5, 1), 30, 60),))
frames, gt = generate(spec)
print("%d frames of %s, target box %s" % (len(frames), frames[0].shape, gt[0]))

trace = []


def watch(state):
    b = state.reliability.beta
    trace.append((state.frame_index, b[state.masks.column(0)].mean(), b[state.masks.column(2)].mean()))


boxes = track_sequence(frames, gt[0], TrackConfig(), on_frame=watch)

print("frame  left-column beta  right-column beta")
for t, left, right in trace[::5]:
    print("%5d  %16.2f  %17.2f" % (t, left, right))

res = ope_metrics(make_records(np.array(boxes), gt))
print("DP@20 %.2f, AUC %.3f" % (res.dp20, res.auc))
