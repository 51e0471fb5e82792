"""Deterministic SVG plots of variation profiles and low-dimensional covers."""

import logging
from typing import Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

import config  # noqa: E402
from covers import ColoredCover, Cover  # noqa: E402
from oscillation import VariationProfile  # noqa: E402

logger = logging.getLogger(__name__)


def _save(fig, path: str) -> str:
    matplotlib.rcParams["svg.hashsalt"] = config.PLOT_HASH_SALT
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Wrote plot {path}")
    return path


def plot_profiles(profiles: Sequence[VariationProfile], path: str) -> str:
    """Line chart of entry(N) against N, one line per profile."""
    fig, ax = plt.subplots(figsize=config.PLOT_FIGSIZE)
    for profile in profiles:
        frame = profile.to_frame()
        ax.plot(frame["N"].to_list(), frame["value"].to_list(), marker="o", label=f"R = {profile.R:g}")
    ax.set_xlabel("distance from basepoint N")
    ax.set_ylabel("largest variation")
    if profiles:
        ax.legend()
    return _save(fig, path)


def plot_cover(cover: Union[Cover, ColoredCover], path: str) -> str:
    """
    Interval diagram for covers of one-dimensional spaces, rectangle diagram
    (member bounding boxes) for two-dimensional ones; colored covers are drawn
    one color per family.

    Raises:
        ValueError: If the space has no coordinates of dimension 1 or 2
    """
    flat = cover.flattened if isinstance(cover, ColoredCover) else cover
    coords = flat.space.coordinates
    if coords is None or coords.shape[1] not in (1, 2):
        raise ValueError("Cover plots need a one- or two-dimensional coordinate space")
    if isinstance(cover, ColoredCover):
        colors = cover.family_of_member
    else:
        colors = list(range(len(flat)))
    palette = plt.get_cmap("tab10")

    fig, ax = plt.subplots(figsize=config.PLOT_FIGSIZE)
    for k in range(len(flat)):
        idx = flat.member_indices(k)
        if idx.size == 0:
            continue
        color = palette(colors[k] % 10)
        if coords.shape[1] == 1:
            xs = coords[idx, 0]
            ax.plot([xs.min(), xs.max()], [k, k], color=color, linewidth=4)
        else:
            lo, hi = coords[idx].min(axis=0), coords[idx].max(axis=0)
            ax.add_patch(
                Rectangle(
                    (lo[0], lo[1]), hi[0] - lo[0], hi[1] - lo[1],
                    fill=False, edgecolor=color, linewidth=1.0,
                )
            )
    if coords.shape[1] == 1:
        ax.set_ylabel("member")
    else:
        ax.set_xlim(coords[:, 0].min() - 1, coords[:, 0].max() + 1)
        ax.set_ylim(coords[:, 1].min() - 1, coords[:, 1].max() + 1)
        ax.set_aspect("equal")
    return _save(fig, path)
