"""Bounded, weighted memory of training samples."""
import numpy as np

from .errors import ShapeMismatch
from .learning import TrainingSet

T_MAX = 50


def learning_rate(frame, early=0.011, late=0.02, early_frames=10):
    """Weight given to the sample of 1-based ``frame``."""
    return early if frame <= early_frames else late


class SampleMemory:
    """Samples with temporal weights that always sum to one.

    New samples enter with weight ``omega`` while older weights decay by
    ``1 - omega``.  Once more than ``capacity`` samples are held, the two
    closest samples (L2 distance) are fused into their weighted average.
    """

    def __init__(self, capacity=T_MAX):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.samples = []
        self.weights = np.zeros(0)
        self._dist = np.zeros((0, 0))

    def __len__(self):
        return len(self.samples)

    @property
    def sample_shape(self):
        return self.samples[0].shape if self.samples else None

    def _distances_to(self, x):
        return np.array([np.sum((s - x) ** 2) for s in self.samples])

    def insert(self, sample, omega):
        if not 0 < omega < 1:
            raise ValueError("omega must lie in (0, 1)")
        sample = np.array(sample, dtype=float)
        if self.samples and sample.shape != self.sample_shape:
            raise ShapeMismatch(f"sample {sample.shape} vs memory {self.sample_shape}")
        if not self.samples:
            self.samples = [sample]
            self.weights = np.ones(1)
            self._dist = np.zeros((1, 1))
            return self

        d = self._distances_to(sample)
        n = len(self.samples)
        dist = np.zeros((n + 1, n + 1))
        dist[:n, :n] = self._dist
        dist[n, :n] = dist[:n, n] = d
        self._dist = dist
        self.samples.append(sample)
        self.weights = np.append((1 - omega) * self.weights, omega)
        if len(self.samples) > self.capacity:
            self.merge_closest()
        self.weights = self.weights / self.weights.sum()
        return self

    def closest_pair(self):
        d = self._dist + np.diag(np.full(len(self.samples), np.inf))
        i, j = np.unravel_index(np.argmin(d), d.shape)
        return (int(i), int(j)) if i < j else (int(j), int(i))

    def merge_closest(self):
        """Fuse the two nearest samples; the fused weight is the sum of both."""
        i, j = self.closest_pair()
        wi, wj = self.weights[i], self.weights[j]
        total = wi + wj
        if total > 0:
            merged = (wi * self.samples[i] + wj * self.samples[j]) / total
        else:
            merged = 0.5 * (self.samples[i] + self.samples[j])
        del self.samples[j]
        self.samples[i] = merged
        self.weights = np.delete(self.weights, j)
        self.weights[i] = total
        dist = np.delete(np.delete(self._dist, j, axis=0), j, axis=1)
        d = self._distances_to(merged)
        dist[i, :] = dist[:, i] = d
        self._dist = dist
        return self

    def weighted_mass(self):
        return np.tensordot(self.weights, np.stack(self.samples), axes=1)

    def training_set(self, label):
        return TrainingSet(np.stack(self.samples), self.weights, label)
