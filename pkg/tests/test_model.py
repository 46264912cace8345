import pytest

from splitmac.latency import tau_smp
from splitmac.model import (
    MNIST_LENET,
    ComputeProfile,
    LayerSpecError,
    ModelProfile,
    derive_model_profile,
    layer_stats,
)


def test_lenet_smashed_data_size():
    m = derive_model_profile(MNIST_LENET, cut_layer=3, batch=256, bits_per_value=32)
    assert m.smashed_bits_per_batch == 256 * 32 * 14 * 14 * 32 == 51_380_224
    assert m.grad_bits_per_batch == m.smashed_bits_per_batch


def test_lenet_device_model_size():
    # CONV1: 32 * (9 * 1 + 1); CONV2: 32 * (9 * 32 + 1)
    params = 32 * 10 + 32 * 289
    assert derive_model_profile().device_model_bits == params * 32


def test_lenet_shapes():
    shapes = [s.out_shape for s in layer_stats(MNIST_LENET)]
    assert shapes[2] == (32, 14, 14)
    assert shapes[5] == (64, 7, 7)
    assert shapes[8] == (128, 3, 3)
    assert shapes[-1] == (10,)


def test_lenet_flops():
    m = derive_model_profile()
    conv1 = 2 * 28 * 28 * 32 * 9 * 1
    conv2 = 2 * 28 * 28 * 32 * 9 * 32
    pool1 = 32 * 14 * 14 * 4
    assert m.fwd_device_flops_per_sample == conv1 + conv2 + pool1
    assert m.bwd_device_flops_per_sample == 2 * m.fwd_device_flops_per_sample


def test_server_workload_gives_table_scale_smp():
    smp = tau_smp(derive_model_profile(), ComputeProfile())
    assert 0.005 <= smp <= 0.1
    assert smp == pytest.approx(0.02, rel=0.1)


def test_batch_scaling():
    a = derive_model_profile(batch=128)
    b = derive_model_profile(batch=256)
    assert b.smashed_bits_per_batch == 2 * a.smashed_bits_per_batch
    assert b.device_model_bits == a.device_model_bits


@pytest.mark.parametrize("cut", [0, 12, -1])
def test_cut_out_of_range(cut):
    with pytest.raises(LayerSpecError):
        derive_model_profile(cut_layer=cut)


@pytest.mark.parametrize("layers", [
    [{"type": "conv", "filters": 8}, {"type": "fc", "units": 2}],
    [{"type": "dropout"}, {"type": "fc", "units": 2}],
    [{"filters": 8}, {"type": "fc", "units": 2}],
    [{"type": "fc", "units": 4}, {"type": "conv", "filters": 2, "kernel": 3}],
])
def test_malformed_layer_specs(layers):
    with pytest.raises(LayerSpecError):
        derive_model_profile(layers, cut_layer=1)


def test_pool_only_device_side_rejected():
    layers = [{"type": "pool", "kernel": 2}, {"type": "fc", "units": 10}]
    with pytest.raises(LayerSpecError):
        derive_model_profile(layers, cut_layer=1)


def test_unknown_named_spec():
    with pytest.raises(LayerSpecError):
        derive_model_profile("resnet")


def test_profile_invariants():
    with pytest.raises(ValueError):
        ModelProfile(0, 1, 1, 1, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        ModelProfile(1, 1, 1, 1, 1, 1, 1, 0)
    with pytest.raises(ValueError):
        ComputeProfile(server_cpu_hz=0)
