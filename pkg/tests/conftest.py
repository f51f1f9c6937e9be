import os

import pytest

from glyphattack import AttackConfig, AttackContext, RenderConfig, build_pixel_index
from glyphattack.bundled import (attack_segmenter, load_corpus, load_radicals,
                                 mock_backend_suite, stub_charset)
from glyphattack.glyph import DEFAULT_FONT, _find_dejavu

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

DEJAVU = _find_dejavu()
needs_dejavu = pytest.mark.skipif(DEJAVU is None, reason="DejaVu Sans not installed")


@pytest.fixture(scope="session")
def render_cfg():
    return RenderConfig()


@pytest.fixture(scope="session")
def stub_render_cfg():
    """Stub font only (no fallback), used where coverage must be exact."""
    return RenderConfig(font_paths=(DEFAULT_FONT,))


@pytest.fixture(scope="session")
def charset():
    return stub_charset()


@pytest.fixture(scope="session")
def stub_index(render_cfg, charset):
    return build_pixel_index(charset, render_cfg)


@pytest.fixture(scope="session")
def radicals():
    return load_radicals()


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


def make_ctx(render_cfg, index, radicals, **cfg_kwargs):
    debug = cfg_kwargs.pop("debug_candidates", False)
    return AttackContext(config=AttackConfig(**cfg_kwargs), render=render_cfg,
                         backends=mock_backend_suite(), index=index,
                         dictionary=radicals, segmenter=attack_segmenter(),
                         debug_candidates=debug)


@pytest.fixture()
def mock_ctx(render_cfg, stub_index, radicals):
    return make_ctx(render_cfg, stub_index, radicals)
