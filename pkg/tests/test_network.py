import numpy as np
import pytest
import torch
from helpers import finite_difference_check, random_samples

from socnav import network
from socnav.errors import InputError
from socnav.network import (
    ModelConfig,
    build_model,
    forward,
    load_checkpoint,
    save_checkpoint,
)
from socnav.sampling import NavigationInput
from socnav.trainer import batch_loss
from socnav.voxelizer import voxelize


@pytest.fixture(scope="module")
def samples():
    return random_samples(4, seed=3)


@pytest.fixture(scope="module")
def mm():
    return build_model(ModelConfig(modality="multimodal"), seed=0).eval()


def test_config_validation():
    with pytest.raises(InputError):
        ModelConfig(modality="thermal")
    with pytest.raises(InputError):
        ModelConfig(embed_dim=130, tf_heads=4)
    with pytest.raises(InputError):
        ModelConfig(M=6)
    with pytest.raises(InputError):
        ModelConfig(img_channels=[])


def test_encode_image_zero_deterministic(mm):
    img = torch.zeros(1, 224, 224, 3, dtype=torch.uint8)
    with torch.no_grad():
        a, b = mm.encode_image(img), mm.encode_image(img)
    assert a.shape == (1, 128)
    assert torch.isfinite(a).all() and torch.equal(a, b)


def test_encode_image_pixel_sensitivity(mm):
    img = torch.full((1, 224, 224, 3), 100, dtype=torch.uint8)
    img2 = img.clone()
    img2[0, 120, 97, 1] = 255
    with torch.no_grad():
        assert not torch.equal(mm.encode_image(img), mm.encode_image(img2))


def test_encode_pointcloud(mm):
    g = torch.zeros(1, 160, 120, 50, dtype=torch.uint8)
    g2 = g.clone()
    g[0, 41, 60, 20] = 1
    g2[0, 42, 60, 20] = 1
    with torch.no_grad():
        z = mm.encode_pointcloud(torch.zeros_like(g))
        assert z.shape == (1, 128) and torch.isfinite(z).all()
        assert torch.equal(z, mm.encode_pointcloud(torch.zeros_like(g)))
        assert not torch.equal(mm.encode_pointcloud(g), mm.encode_pointcloud(g2))


def test_encode_pointcloud_point_permutation(mm, rng):
    pts = rng.uniform([0, -3, -0.5], [8, 3, 2], size=(2000, 3))
    g1 = torch.from_numpy(voxelize(pts).occ)[None]
    g2 = torch.from_numpy(voxelize(rng.permutation(pts)).occ)[None]
    with torch.no_grad():
        assert torch.equal(mm.encode_pointcloud(g1), mm.encode_pointcloud(g2))


def test_temporal_encode_stateful(mm):
    emb = torch.zeros(1, 128)
    goal = torch.tensor([[2.5, 0.0]])
    with torch.no_grad():
        h1, s1 = mm.temporal_encode("lidar", emb, goal)
        h1b, _ = mm.temporal_encode("lidar", emb, goal, torch.zeros(1, 128))
        h2, _ = mm.temporal_encode("lidar", emb, goal, s1)
    assert h1.shape == (1, 128) and torch.isfinite(h1).all()
    assert torch.equal(h1, h1b)
    assert not torch.equal(h1, h2)


def test_heads(mm):
    hidden = torch.randn(2, 128, generator=torch.Generator().manual_seed(0))
    with torch.no_grad():
        fg, fl = mm.fuse([hidden[:1], hidden[1:]])
        wp = mm.global_head_forward(fg)
        assert wp.shape == (1, 5, 2) and torch.equal(wp, mm.global_head_forward(fg))
        act = mm.local_head_forward(fl, wp)
        assert act.shape == (1, 2) and torch.equal(act, mm.local_head_forward(fl, wp))
        assert not torch.equal(act, mm.local_head_forward(fl, wp + 0.5))


def test_fuse_ablation(mm):
    g = torch.Generator().manual_seed(1)
    h_pc, h_img = torch.randn(1, 128, generator=g), torch.randn(1, 128, generator=g)
    with torch.no_grad():
        full = mm.fuse([h_pc, h_img])
        ablated = mm.fuse([h_pc, torch.zeros_like(h_img)])
    assert full[0].shape == (1, 128) and full[1].shape == (1, 128)
    assert not torch.equal(full[0], ablated[0]) and not torch.equal(full[1], ablated[1])


def test_global_head_gradient_matches_finite_differences():
    torch.manual_seed(0)
    m = build_model(ModelConfig.tiny(), seed=0, dtype=torch.float64)
    hidden = torch.randn(3, 8, dtype=torch.float64)
    target = torch.randn(3, 5, 2, dtype=torch.float64)

    class HeadOnly(torch.nn.Module):
        def __init__(self):
            super().__init__()
            self.head = m.global_head

    def loss():
        return ((m.global_head_forward(hidden) - target) ** 2).sum(-1).mean()

    worst, n = finite_difference_check(HeadOnly(), loss)
    assert n > 0 and worst <= 1e-3


def test_forward_shapes_all_variants(samples):
    for mod in network.MODALITIES:
        cfg = ModelConfig(modality=mod)
        out = forward(samples[0].input, cfg, build_model(cfg, seed=0).eval())
        assert out.waypoints.shape == (5, 2) and out.action.shape == (2,)
        assert np.all(np.isfinite(out.waypoints)) and np.all(np.isfinite(out.action))


def test_unimodal_isolation(samples, rng):
    inp = samples[0].input
    other_vox = voxelize(rng.uniform([0, -3, -0.5], [8, 3, 2], size=(5000, 3)))
    other_img = rng.integers(0, 256, (224, 224, 3), dtype=np.uint8)
    cfg = ModelConfig(modality="rgb")
    m = build_model(cfg, seed=0).eval()
    a = forward(inp, cfg, m)
    b = forward(NavigationInput(other_vox, inp.image, inp.goal), cfg, m)
    assert np.array_equal(a.waypoints, b.waypoints) and np.array_equal(a.action, b.action)
    cfg = ModelConfig(modality="lidar")
    m = build_model(cfg, seed=0).eval()
    a = forward(inp, cfg, m)
    b = forward(NavigationInput(inp.voxels, other_img, inp.goal), cfg, m)
    assert np.array_equal(a.waypoints, b.waypoints) and np.array_equal(a.action, b.action)


def test_multimodal_differs_from_unimodal(samples):
    inp = samples[1].input
    outs = {}
    for mod in network.MODALITIES:
        cfg = ModelConfig(modality=mod)
        outs[mod] = forward(inp, cfg, build_model(cfg, seed=7).eval())
    for uni in ("rgb", "lidar"):
        assert not np.array_equal(outs["multimodal"].waypoints, outs[uni].waypoints)
        assert not np.array_equal(outs["multimodal"].action, outs[uni].action)


def test_head_architecture_parity():
    def post_encoder_shapes(mod):
        m = build_model(ModelConfig(modality=mod), seed=0)
        return [
            (n.replace("rnn_img", "rnn").replace("rnn_vox", "rnn"), tuple(p.shape))
            for n, p in m.named_parameters()
            if not n.startswith(("img_enc.", "vox_enc."))
        ]

    assert sorted(post_encoder_shapes("rgb")) == sorted(post_encoder_shapes("lidar"))


@pytest.mark.parametrize("mod", network.MODALITIES)
def test_parameter_partition(mod):
    m = build_model(ModelConfig(modality=mod), seed=0)
    theta, phi = m.theta(), m.phi()
    names = [n for n, _ in m.named_parameters()]
    assert set(theta) | set(phi) == set(names)
    assert not set(theta) & set(phi)
    assert any(n.startswith("global_head") for n in theta) and any(n.startswith("transformer") for n in phi)
    assert all(torch.isfinite(p).all() for p in m.parameters())


def test_input_errors(samples):
    cfg = ModelConfig(modality="rgb")
    m = build_model(cfg, seed=0)
    bad = NavigationInput(samples[0].input.voxels, np.zeros((100, 100, 3), np.uint8), samples[0].input.goal)
    with pytest.raises(InputError):
        forward(bad, cfg, m)
    with pytest.raises(InputError):
        forward(samples[0].input, ModelConfig(modality="lidar"), m)
    lidar = build_model(ModelConfig(modality="lidar"), seed=0)
    with pytest.raises(InputError):
        lidar(None, torch.zeros(1, 10, 10, 10), torch.zeros(1, 2))


def test_checkpoint_roundtrip(tmp_path, samples):
    cfg = ModelConfig(modality="multimodal")
    m = build_model(cfg, seed=0).eval()
    path = save_checkpoint(tmp_path / "m.pt", m, {"seed": 0, "epoch": 3, "loss": 0.5})
    m2, meta = load_checkpoint(path)
    assert meta == {"seed": 0, "epoch": 3, "loss": 0.5}
    assert m2.config == cfg
    a, b = forward(samples[0].input, cfg, m), forward(samples[0].input, cfg, m2)
    assert np.array_equal(a.waypoints, b.waypoints) and np.array_equal(a.action, b.action)


def test_checkpoint_rejects_foreign_file(tmp_path):
    torch.save({"hello": 1}, tmp_path / "x.pt")
    with pytest.raises(InputError):
        load_checkpoint(tmp_path / "x.pt")


def test_full_gradient_tiny_config(samples):
    m = build_model(ModelConfig.tiny(), seed=0, dtype=torch.float64)
    batch = samples[:2]
    worst, n = finite_difference_check(m, lambda: batch_loss(m, batch, 1.0, torch.float64)[0])
    assert n == sum(p.numel() for p in m.parameters())
    assert worst <= 1e-3, worst
