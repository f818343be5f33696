"""
Hiperred de condicionamiento y materialización del vector crudo en un JdanModel.

Orden de partición del vector crudo: marginal 1 (pesos capa a capa por filas, luego sesgos),
marginal 2, ..., y al final las correlaciones crudas en orden (1,2), (1,3), ..., (2,3), ...
"""
from typing import List, Sequence, Tuple

import numpy as np

from src.domain.activation import Activation
from src.domain.errors import ContractError
from src.domain.models import ConditioningNet, CorrelationParams, JdanModel, MlpHead, pair_count
from src.domain.schemas import ArchitectureDescriptor
from src.services import autodiff as ad
from src.services.activations import act_eval
from src.services.marginal_net import flatten_marginal, init_marginal_params, raw_count, unflatten_marginal


def segment_sizes(arch: ArchitectureDescriptor) -> List[int]:
    """Tamaño de cada bloque de la partición: D marginales y las correlaciones."""
    return [raw_count(arch.marginal_layer_sizes(d)) for d in range(arch.dim)] + [pair_count(arch.dim)]


def output_dim(arch: ArchitectureDescriptor) -> int:
    return sum(segment_sizes(arch))


def _standardization(arch: ArchitectureDescriptor, d: int) -> Tuple[float, float]:
    b = arch.bounds[d]
    return 0.5 * (b.lower + b.upper), 0.5 * (b.upper - b.lower)


def materialize(raw, arch: ArchitectureDescriptor) -> JdanModel:
    """
    Construye un JdanModel válido a partir de cualquier vector crudo de longitud output_dim(arch).
    """
    raw = np.asarray(raw, dtype=float).reshape(-1)
    if raw.shape[0] != output_dim(arch):
        raise ContractError(f"Vector crudo de longitud {raw.shape[0]}, se esperaba {output_dim(arch)}")
    if arch.bounds is None:
        raise ContractError("La arquitectura no tiene cotas: ajústelas antes de materializar")
    marginals, pos = [], 0
    for d, size in enumerate(segment_sizes(arch)[:-1]):
        shift, scale = _standardization(arch, d)
        marginals.append(unflatten_marginal(raw[pos:pos + size], arch.marginal_layer_sizes(d),
                                            arch.marginals[d].activation, shift, scale))
        pos += size
    correlations = CorrelationParams(dim=arch.dim, raw=raw[pos:].copy())
    return JdanModel(dim=arch.dim, marginals=marginals, correlations=correlations, bounds=list(arch.bounds))


def flatten(model: JdanModel) -> np.ndarray:
    return np.concatenate([flatten_marginal(m) for m in model.marginals] + [model.correlations.raw])


def template_raw_vector(arch: ArchitectureDescriptor, rng: np.random.Generator) -> np.ndarray:
    """Vector crudo inicial: marginales casi lineales con sesgos repartidos y correlaciones en 0."""
    parts = [flatten_marginal(init_marginal_params(arch.marginal_layer_sizes(d), arch.marginals[d].activation, rng))
             for d in range(arch.dim)]
    parts.append(np.zeros(pair_count(arch.dim)))
    return np.concatenate(parts)


def _init_head(layer_sizes: List[int], activation: Activation, final_bias: np.ndarray,
               init_scale: float, rng: np.random.Generator) -> MlpHead:
    weights, biases = [], []
    n_layers = len(layer_sizes) - 1
    for k, (n_in, n_out) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
        std = 1.0 / np.sqrt(max(n_in, 1))
        w = rng.normal(0.0, std, size=(n_out, n_in))
        if k == n_layers - 1:
            weights.append(w * init_scale)
            biases.append(final_bias.copy())
        else:
            weights.append(w)
            biases.append(np.zeros(n_out))
    return MlpHead(list(layer_sizes), weights, biases, activation)


def init_conditioning_net(arch: ArchitectureDescriptor, seed: int) -> ConditioningNet:
    """
    Pesos ocultos ~ N(0, 1/fan_in); la capa final se escala por init_scale y su sesgo es
    un vector crudo plantilla. Con F=0 la red es solo ese sesgo.
    """
    rng = np.random.default_rng(seed)
    template = template_raw_vector(arch, rng)
    hidden = list(arch.hypernet_hidden)
    if arch.heads == "shared":
        sizes = [arch.feature_dim, *hidden, output_dim(arch)]
        heads = [_init_head(sizes, arch.hypernet_activation, template, arch.init_scale, rng)]
    else:
        heads, pos = [], 0
        for size in segment_sizes(arch):
            sizes = [arch.feature_dim, *hidden, size]
            heads.append(_init_head(sizes, arch.hypernet_activation, template[pos:pos + size], arch.init_scale, rng))
            pos += size
    return ConditioningNet(input_dim=arch.feature_dim, heads=heads)


def _features(net: ConditioningNet, x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if net.input_dim == 0 and arr.size == 0:
        return arr if arr.ndim == 2 else np.zeros((1, 0))
    if arr.shape[-1:] != (net.input_dim,):
        raise ContractError(f"Se esperaban {net.input_dim} features, forma recibida {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError("Las features deben ser finitas")
    return arr.reshape(-1, net.input_dim)


def nfn_forward(net: ConditioningNet, x) -> np.ndarray:
    """Vector crudo de parámetros para cada fila de x (ya escalada)."""
    xs = _features(net, x)
    outputs = []
    for head in net.heads:
        a = xs
        n_layers = len(head.weights)
        for k, (w, b) in enumerate(zip(head.weights, head.biases)):
            a = a @ w.T + b
            if k < n_layers - 1:
                a = act_eval(head.activation, a)
        outputs.append(a)
    out = np.concatenate(outputs, axis=1)
    return out[0] if np.ndim(x) <= 1 else out


def nfn_forward_tensor(net: ConditioningNet, params: Sequence[ad.Tensor], x: np.ndarray) -> ad.Tensor:
    """Misma red sobre la cinta; `params` sigue el orden de net.parameters()."""
    xs = ad.constant(_features(net, x))
    it = iter(params)
    outputs = []
    for head in net.heads:
        a = xs
        n_layers = len(head.weights)
        for k in range(n_layers):
            w, b = next(it), next(it)
            a = a @ ad.transpose(w) + b
            if k < n_layers - 1:
                a = ad.activate(head.activation, a)
        outputs.append(a)
    return outputs[0] if len(outputs) == 1 else ad.concat(outputs, axis=1)
