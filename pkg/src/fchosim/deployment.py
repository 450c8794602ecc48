"""Hexagonal 7-site / 21-cell layout with wrap-around, and UE kinematics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ConfigError, ScenarioConfig

SECTOR_AZIMUTHS_DEG = (30.0, 150.0, 270.0)


@dataclass(frozen=True)
class NetworkLayout:
    """Static network geometry.

    Cells are numbered site-major, sector-minor: cell ``3*s + k`` is sector
    ``k`` of site ``s``.
    """

    sites: np.ndarray  # (S, 2) m
    cell_site: np.ndarray  # (C,) int
    cell_azimuth_deg: np.ndarray  # (C,) sector boresight
    bs_height_m: float
    inter_site_distance: float
    replica_offsets: np.ndarray  # (7, 2), row 0 is the zero vector

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def n_cells(self) -> int:
        return len(self.cell_site)

    @property
    def cell_positions(self) -> np.ndarray:
        return self.sites[self.cell_site]

    @property
    def domain_inradius(self) -> float:
        """Inradius of the hexagonal fundamental domain."""
        return 0.5 * float(np.linalg.norm(self.replica_offsets[1]))

    @property
    def domain_circumradius(self) -> float:
        return self.domain_inradius / np.cos(np.pi / 6)


def _hex_basis(d: float) -> tuple[np.ndarray, np.ndarray]:
    return np.array([d, 0.0]), np.array([0.5 * d, 0.5 * np.sqrt(3.0) * d])


def _rotate(v: np.ndarray, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def build_network(config: ScenarioConfig) -> NetworkLayout:
    d = float(config.inter_site_distance_m)
    if not d > 0:
        raise ConfigError(["inter_site_distance_m must be positive"])
    a1, a2 = _hex_basis(d)
    sites = [np.zeros(2)]
    if config.n_rings >= 1:
        sites += [_rotate(a1, k * np.pi / 3) for k in range(6)]
        # 7-site cluster tiles the plane with period 2*a1 + a2 (norm sqrt(7) d)
        period = 2 * a1 + a2
    else:
        # a lone site tiles with the site lattice itself
        period = a1
    offsets = [np.zeros(2)] + [_rotate(period, k * np.pi / 3) for k in range(6)]
    sites = np.array(sites)
    n_sites = len(sites)
    cell_site = np.repeat(np.arange(n_sites), 3)
    cell_az = np.tile(np.array(SECTOR_AZIMUTHS_DEG), n_sites)
    return NetworkLayout(
        sites=sites,
        cell_site=cell_site,
        cell_azimuth_deg=cell_az,
        bs_height_m=float(config.bs_height_m),
        inter_site_distance=d,
        replica_offsets=np.array(offsets),
    )


def wrapped_displacement(a, b, layout: NetworkLayout) -> np.ndarray:
    """Minimum-norm displacement from ``a`` to any replica of ``b``.

    Broadcasts over leading dimensions. Ties go to the lowest replica index.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    diff = (b - a)[..., None, :] + layout.replica_offsets  # (..., 7, 2)
    d2 = np.einsum("...k,...k->...", diff, diff)
    idx = np.argmin(d2, axis=-1)
    return np.take_along_axis(diff, idx[..., None, None], axis=-2)[..., 0, :]


def in_domain(pos, layout: NetworkLayout) -> np.ndarray:
    """True where ``pos`` is no closer to a replica of the origin than to the origin.

    The fundamental domain is the Voronoi cell of the origin in the lattice
    spanned by the replica offsets: a hexagon containing all sites.
    """
    pos = np.asarray(pos, dtype=float)
    off = layout.replica_offsets[1:]
    # |p|^2 <= |p - o|^2  <=>  p.o <= |o|^2 / 2
    proj = pos @ off.T
    return np.all(proj <= 0.5 * np.einsum("ij,ij->i", off, off) + 1e-9, axis=-1)


def wrap_position(pos, layout: NetworkLayout) -> np.ndarray:
    """Map positions back into the fundamental domain via the replica offsets."""
    pos = np.array(pos, dtype=float)
    zero = np.zeros(2)
    # one nearest-replica step suffices for moves shorter than the inradius
    for _ in range(3):
        disp = wrapped_displacement(zero, pos, layout)
        if np.allclose(disp, pos):
            break
        pos = disp
    return pos


@dataclass
class UeKinematics:
    position: np.ndarray  # (U, 2)
    speed: float  # m/s
    heading: np.ndarray  # (U,) rad
    height: float = 1.5

    def copy(self) -> "UeKinematics":
        return UeKinematics(self.position.copy(), self.speed, self.heading.copy(), self.height)


def drop_ues(n: int, layout: NetworkLayout, speed: float, rng: np.random.Generator,
             height: float = 1.5) -> UeKinematics:
    """Uniform drop over the fundamental domain (rejection sampling), uniform headings."""
    r = layout.domain_circumradius
    out = np.empty((0, 2))
    while len(out) < n:
        cand = rng.uniform(-r, r, size=(2 * n, 2))
        out = np.vstack([out, cand[in_domain(cand, layout)]])
    heading = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return UeKinematics(out[:n].copy(), float(speed), heading, height)


def step_ue(ue: UeKinematics, dt: float, layout: NetworkLayout) -> UeKinematics:
    """Advance every UE by ``speed * dt`` along its heading, wrapping at the border."""
    if ue.speed == 0.0:
        return ue.copy()
    step = ue.speed * dt * np.column_stack([np.cos(ue.heading), np.sin(ue.heading)])
    pos = ue.position + step
    outside = ~in_domain(pos, layout)
    if np.any(outside):
        pos[outside] = wrap_position(pos[outside], layout)
    return UeKinematics(pos, ue.speed, ue.heading.copy(), ue.height)
