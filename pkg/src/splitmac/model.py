"""Payload sizes and FLOP workloads of the split model.

FLOP conventions: a multiply-accumulate counts as 2 FLOPs, a pooling window
costs one FLOP per input element it reads, backward costs twice the forward
pass. Convolutions use stride 1 and "same" padding; pooling uses stride equal
to the window and floors the output size. Biases are counted as parameters
but not as FLOPs.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ModelProfile:
    device_model_bits: float
    smashed_bits_per_batch: float
    grad_bits_per_batch: float
    fwd_device_flops_per_sample: float
    bwd_device_flops_per_sample: float
    fwd_server_flops_per_sample: float
    bwd_server_flops_per_sample: float
    batch_size: int = 256

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self) -> list[str]:
        out = [f"{name} must be > 0" for name in (
            "device_model_bits", "smashed_bits_per_batch", "grad_bits_per_batch",
            "fwd_device_flops_per_sample", "bwd_device_flops_per_sample",
            "fwd_server_flops_per_sample", "bwd_server_flops_per_sample",
        ) if not getattr(self, name) > 0]
        if not (isinstance(self.batch_size, int) and self.batch_size >= 1):
            out.append("batch_size must be an integer >= 1")
        return out


@dataclass(frozen=True)
class ComputeProfile:
    server_cpu_hz: float = 100e9
    device_intensity_flops_per_cycle: float = 4.0
    server_intensity_flops_per_cycle: float = 16.0

    def __post_init__(self):
        for name in ("server_cpu_hz", "device_intensity_flops_per_cycle", "server_intensity_flops_per_cycle"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


# 12-layer LeNet-style network for 28x28 MNIST
MNIST_LENET: list[dict] = [
    {"name": "CONV1", "type": "conv", "filters": 32, "kernel": 3},
    {"name": "CONV2", "type": "conv", "filters": 32, "kernel": 3},
    {"name": "POOL1", "type": "pool", "kernel": 2},
    {"name": "CONV3", "type": "conv", "filters": 64, "kernel": 3},
    {"name": "CONV4", "type": "conv", "filters": 64, "kernel": 3},
    {"name": "POOL2", "type": "pool", "kernel": 2},
    {"name": "CONV5", "type": "conv", "filters": 128, "kernel": 3},
    {"name": "CONV6", "type": "conv", "filters": 128, "kernel": 3},
    {"name": "POOL3", "type": "pool", "kernel": 2},
    {"name": "FC1", "type": "fc", "units": 382},
    {"name": "FC2", "type": "fc", "units": 192},
    {"name": "FC3", "type": "fc", "units": 10},
]
MNIST_INPUT_SHAPE = (1, 28, 28)

LAYER_SPECS = {"mnist_lenet": (MNIST_LENET, MNIST_INPUT_SHAPE)}


class LayerSpecError(ValueError):
    pass


@dataclass(frozen=True)
class LayerStats:
    name: str
    out_shape: tuple[int, ...]
    params: int
    fwd_flops: int


def layer_stats(layers: list[dict], input_shape=MNIST_INPUT_SHAPE) -> list[LayerStats]:
    """Walk the layer list, tracking output shape, parameter count and forward FLOPs."""
    shape = tuple(int(x) for x in input_shape)
    if len(shape) != 3 or min(shape) < 1:
        raise LayerSpecError(f"input_shape must be (channels, height, width), got {input_shape}")
    out = []
    for idx, layer in enumerate(layers, start=1):
        if not isinstance(layer, dict) or "type" not in layer:
            raise LayerSpecError(f"layer {idx}: expected an object with a 'type' key")
        kind = layer["type"]
        name = layer.get("name", f"{kind}{idx}")
        try:
            if kind == "conv":
                if len(shape) != 3:
                    raise LayerSpecError(f"layer {idx} ({name}): conv after flatten")
                c, h, w = shape
                f, k = int(layer["filters"]), int(layer["kernel"])
                params = f * (k * k * c + 1)
                flops = 2 * h * w * f * k * k * c
                shape = (f, h, w)
            elif kind == "pool":
                if len(shape) != 3:
                    raise LayerSpecError(f"layer {idx} ({name}): pool after flatten")
                c, h, w = shape
                k = int(layer["kernel"])
                params = 0
                flops = c * (h // k) * (w // k) * k * k
                shape = (c, h // k, w // k)
            elif kind == "fc":
                n_in = 1
                for s in shape:
                    n_in *= s
                units = int(layer["units"])
                params = units * (n_in + 1)
                flops = 2 * n_in * units
                shape = (units,)
            else:
                raise LayerSpecError(f"layer {idx}: unknown type {kind!r}")
        except KeyError as e:
            raise LayerSpecError(f"layer {idx} ({name}): missing field {e.args[0]!r}") from None
        if min(shape) < 1:
            raise LayerSpecError(f"layer {idx} ({name}): output shape {shape} is empty")
        out.append(LayerStats(name, shape, params, flops))
    return out


def derive_model_profile(
    layers: list[dict] | str = "mnist_lenet",
    cut_layer: int = 3,
    batch: int = 256,
    bits_per_value: int = 32,
    input_shape=None,
) -> ModelProfile:
    """Split the network after ``cut_layer`` (1-based) and size everything.

    ``layers`` may be a layer list or the name of a built-in spec.
    """
    if isinstance(layers, str):
        if layers not in LAYER_SPECS:
            raise LayerSpecError(f"unknown layer spec {layers!r}")
        layers, default_shape = LAYER_SPECS[layers]
        input_shape = input_shape or default_shape
    input_shape = input_shape or MNIST_INPUT_SHAPE
    if not 1 <= cut_layer < len(layers):
        raise LayerSpecError(f"cut_layer must be in [1, {len(layers) - 1}], got {cut_layer}")
    stats = layer_stats(layers, input_shape)
    device, server = stats[:cut_layer], stats[cut_layer:]
    device_params = sum(s.params for s in device)
    if device_params == 0:
        raise LayerSpecError("device-side model has no parameters")
    act = 1
    for s in device[-1].out_shape:
        act *= s
    smashed = act * batch * bits_per_value
    fwd_d = sum(s.fwd_flops for s in device)
    fwd_s = sum(s.fwd_flops for s in server)
    return ModelProfile(
        device_model_bits=float(device_params * bits_per_value),
        smashed_bits_per_batch=float(smashed),
        grad_bits_per_batch=float(smashed),
        fwd_device_flops_per_sample=float(fwd_d),
        bwd_device_flops_per_sample=float(2 * fwd_d),
        fwd_server_flops_per_sample=float(fwd_s),
        bwd_server_flops_per_sample=float(2 * fwd_s),
        batch_size=batch,
    )
