from typing import Any, Dict, List, Sequence, Tuple

import numpy as np


def clip_by_global_norm(grads: Sequence[np.ndarray], max_norm: float) -> Tuple[List[np.ndarray], float]:
    """Reescala todos los gradientes si su norma L2 conjunta supera max_norm."""
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))
    if norm > max_norm:
        factor = max_norm / norm
        return [g * factor for g in grads], norm
    return [g.copy() for g in grads], norm


class Adam:
    """
    Adam con estado serializable (t, m, v) para checkpoints.
    """
    def __init__(self, params: Sequence[np.ndarray], learning_rate: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> List[np.ndarray]:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        updated = []
        for k, (p, g) in enumerate(zip(params, grads)):
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            m_hat = self.m[k] / bc1
            v_hat = self.v[k] / bc2
            updated.append(p - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps))
        return updated

    def state_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "learning_rate": self.learning_rate,
            "m": [m.tolist() for m in self.m],
            "v": [v.tolist() for v in self.v],
        }

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        self.t = int(state["t"])
        self.learning_rate = float(state.get("learning_rate", self.learning_rate))
        self.m = [np.asarray(m, dtype=float).reshape(ref.shape) for m, ref in zip(state["m"], self.m)]
        self.v = [np.asarray(v, dtype=float).reshape(ref.shape) for v, ref in zip(state["v"], self.v)]
