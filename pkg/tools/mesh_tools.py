"""
Mesh Tools Module

Pure functions for building, tagging, refining and reading tetrahedral meshes
of the truncated domain around a unit-scale object. No physics here - just
geometry, connectivity and region bookkeeping.
"""

from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from tools.errors import (
    AmbiguousRegionError,
    InvalidArgumentError,
    MeshError,
    MeshParseError,
    NegativeVolumeError,
    UnknownRegionError,
)

logger = logging.getLogger(__name__)

EXTERIOR_TAG = "air"

# Local vertex pairs of the six tet edges, and the local edges bounding each face
LOCAL_EDGES = np.array([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
LOCAL_FACES = np.array([(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)])
FACE_EDGES = np.array([
    (3, 4, 5),  # opposite vertex 0
    (1, 2, 5),  # opposite vertex 1
    (0, 2, 4),  # opposite vertex 2
    (0, 1, 3),  # opposite vertex 3
])


# ============================================================================
# DOMAIN TYPES
# ============================================================================

@dataclass(frozen=True)
class Material:
    """Material of one region; object regions have is_object=True."""
    region_tag: str
    mu_r: float = 1.0
    sigma_star: float = 0.0
    is_object: bool = True

    def __post_init__(self):
        if not self.mu_r > 0:
            raise InvalidArgumentError(f"Region {self.region_tag}: mu_r must be positive, got {self.mu_r}")
        if self.sigma_star < 0:
            raise InvalidArgumentError(
                f"Region {self.region_tag}: sigma_star must be non-negative, got {self.sigma_star}"
            )
        if not self.is_object and (self.mu_r != 1.0 or self.sigma_star != 0.0):
            raise InvalidArgumentError(
                f"Exterior region {self.region_tag} must have mu_r=1 and sigma_star=0"
            )


EXTERIOR_MATERIAL = Material(EXTERIOR_TAG, mu_r=1.0, sigma_star=0.0, is_object=False)


@dataclass(frozen=True)
class Shape:
    """Analytic region used to tag tets by centroid inclusion."""
    kind: str
    params: Tuple[Tuple[float, ...], ...]
    region_tag: str

    @classmethod
    def sphere(cls, center: Sequence[float], radius: float, region_tag: str) -> "Shape":
        if radius <= 0:
            raise InvalidArgumentError(f"Sphere radius must be positive, got {radius}")
        return cls("sphere", (tuple(map(float, center)), (float(radius),)), region_tag)

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float], region_tag: str) -> "Shape":
        if np.any(np.asarray(upper, float) <= np.asarray(lower, float)):
            raise InvalidArgumentError(f"Box bounds are inverted: {lower} / {upper}")
        return cls("box", (tuple(map(float, lower)), tuple(map(float, upper))), region_tag)

    @classmethod
    def tetrahedron(cls, vertices: Sequence[Sequence[float]], region_tag: str) -> "Shape":
        verts = np.asarray(vertices, dtype=float)
        if verts.shape != (4, 3):
            raise InvalidArgumentError("A tetrahedron shape needs exactly four 3D vertices")
        if abs(_signed_volumes(verts[None, :, :], np.array([[0, 1, 2, 3]]))[0]) <= 0:
            raise InvalidArgumentError("Tetrahedron shape is degenerate")
        return cls("tetrahedron", tuple(tuple(v) for v in verts.tolist()), region_tag)

    @classmethod
    def from_dict(cls, spec: Dict) -> "Shape":
        """Build a shape from a config mapping such as {'sphere': {...}, 'tag': 'obj'}."""
        tag = spec.get("tag")
        if not tag:
            raise InvalidArgumentError(f"Shape needs a 'tag': {spec}")
        if "sphere" in spec:
            s = spec["sphere"]
            return cls.sphere(s.get("center", (0.0, 0.0, 0.0)), s["radius"], tag)
        if "box" in spec:
            s = spec["box"]
            return cls.box(s["min"], s["max"], tag)
        if "tetrahedron" in spec:
            return cls.tetrahedron(spec["tetrahedron"], tag)
        raise InvalidArgumentError(f"Unknown shape descriptor: {sorted(spec)}")

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points (n, 3) lying inside the shape."""
        pts = np.asarray(points, dtype=float)
        if self.kind == "sphere":
            center, (radius,) = self.params
            return np.sum((pts - np.asarray(center)) ** 2, axis=1) <= radius ** 2
        if self.kind == "box":
            lower, upper = (np.asarray(p) for p in self.params)
            return np.all((pts >= lower) & (pts <= upper), axis=1)
        if self.kind == "tetrahedron":
            verts = np.asarray(self.params)
            bary = _barycentric(verts, pts)
            return np.all(bary >= -1e-12, axis=1)
        raise InvalidArgumentError(f"Unknown shape kind: {self.kind}")

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.kind == "sphere":
            center, (radius,) = self.params
            c = np.asarray(center)
            return c - radius, c + radius
        if self.kind == "box":
            return np.asarray(self.params[0]), np.asarray(self.params[1])
        verts = np.asarray(self.params)
        return verts.min(axis=0), verts.max(axis=0)

    def volume(self) -> float:
        if self.kind == "sphere":
            return 4.0 * np.pi * self.params[1][0] ** 3 / 3.0
        if self.kind == "box":
            return float(np.prod(np.asarray(self.params[1]) - np.asarray(self.params[0])))
        verts = np.asarray(self.params)
        return float(abs(np.linalg.det(verts[1:] - verts[0])) / 6.0)


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Immutable tagged tetrahedral mesh.

    Edges are derived on construction as unique vertex pairs oriented from
    the lower to the higher global vertex index; tet_edge_signs records
    whether each local edge agrees with that global orientation.
    """
    vertices: np.ndarray
    tets: np.ndarray
    tags: np.ndarray
    shapes: Tuple[Shape, ...] = ()
    edges: np.ndarray = field(init=False, repr=False)
    tet_edges: np.ndarray = field(init=False, repr=False)
    tet_edge_signs: np.ndarray = field(init=False, repr=False)
    boundary_faces: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=float).reshape(-1, 3)
        tets = np.array(self.tets, dtype=np.int64).reshape(-1, 4)
        tags = np.array(self.tags, dtype=object).reshape(-1)
        if len(tags) != len(tets):
            raise MeshError(f"{len(tags)} region tags for {len(tets)} tets")
        if len(tets) and (tets.min() < 0 or tets.max() >= len(vertices)):
            raise MeshError("Tet references a vertex that does not exist")

        edges, tet_edges, signs = _derive_edges(tets)
        boundary_faces = _derive_boundary_faces(tets)

        for name, value in (("vertices", vertices), ("tets", tets), ("tags", tags),
                            ("edges", edges), ("tet_edges", tet_edges),
                            ("tet_edge_signs", signs), ("boundary_faces", boundary_faces)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "shapes", tuple(self.shapes))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_tets(self) -> int:
        return len(self.tets)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def region_tags(self) -> List[str]:
        return sorted(set(self.tags.tolist()))

    def with_tags(self, tags: Iterable[str], shapes: Optional[Sequence[Shape]] = None) -> "Mesh":
        return Mesh(self.vertices, self.tets, np.asarray(list(tags), dtype=object),
                    tuple(self.shapes if shapes is None else shapes))


# ============================================================================
# GEOMETRY HELPERS
# ============================================================================

def _signed_volumes(vertices: np.ndarray, tets: np.ndarray) -> np.ndarray:
    """Signed volumes of tets; vertices may be (V, 3) or pre-gathered (T, 4, 3)."""
    pts = vertices[0][tets] if vertices.ndim == 3 else vertices[tets]
    d1 = pts[:, 1] - pts[:, 0]
    d2 = pts[:, 2] - pts[:, 0]
    d3 = pts[:, 3] - pts[:, 0]
    return np.einsum("ij,ij->i", d1, np.cross(d2, d3)) / 6.0


def _barycentric(tet_vertices: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Barycentric coordinates (n, 4) of points with respect to one tet."""
    jac = (tet_vertices[1:] - tet_vertices[0]).T
    local = np.linalg.solve(jac, (points - tet_vertices[0]).T).T
    return np.column_stack([1.0 - local.sum(axis=1), local])


def tet_volumes(mesh: Mesh) -> np.ndarray:
    """Signed volume of every tet."""
    return _signed_volumes(mesh.vertices, mesh.tets)


def tet_centroids(mesh: Mesh) -> np.ndarray:
    return mesh.vertices[mesh.tets].mean(axis=1)


def region_volume(mesh: Mesh, tags: Union[str, Iterable[str]]) -> float:
    """Total volume of the tets carrying any of the given tags."""
    wanted = {tags} if isinstance(tags, str) else set(tags)
    mask = np.isin(mesh.tags, list(wanted))
    return float(tet_volumes(mesh)[mask].sum())


def object_volume(mesh: Mesh) -> float:
    return float(tet_volumes(mesh)[mesh.tags != EXTERIOR_TAG].sum())


def object_bounding_box(mesh: Mesh) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Bounding box of the declared shapes, else of the tagged object tets."""
    if mesh.shapes:
        boxes = [s.bounding_box() for s in mesh.shapes]
        return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)
    mask = mesh.tags != EXTERIOR_TAG
    if not np.any(mask):
        return None
    pts = mesh.vertices[mesh.tets[mask]].reshape(-1, 3)
    return pts.min(axis=0), pts.max(axis=0)


def _derive_edges(tets: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if len(tets) == 0:
        return np.zeros((0, 2), np.int64), np.zeros((0, 6), np.int64), np.zeros((0, 6), np.int64)
    local = tets[:, LOCAL_EDGES]                       # (T, 6, 2)
    ordered = np.sort(local, axis=2).reshape(-1, 2)
    edges, inverse = np.unique(ordered, axis=0, return_inverse=True)
    tet_edges = np.asarray(inverse).reshape(len(tets), 6)
    signs = np.where(local[:, :, 0] < local[:, :, 1], 1, -1)
    return edges.astype(np.int64), tet_edges.astype(np.int64), signs.astype(np.int64)


def _derive_boundary_faces(tets: np.ndarray) -> np.ndarray:
    if len(tets) == 0:
        return np.zeros((0, 3), np.int64)
    faces = np.sort(tets[:, LOCAL_FACES].reshape(-1, 3), axis=1)
    unique, counts = np.unique(faces, axis=0, return_counts=True)
    if np.any(counts > 2):
        raise MeshError(f"{int(np.sum(counts > 2))} faces are shared by more than two tets")
    return unique[counts == 1].astype(np.int64)


def validate_mesh(mesh: Mesh, known_tags: Optional[Iterable[str]] = None) -> None:
    """
    Check the structural invariants of a mesh.

    Raises:
        NegativeVolumeError: first tet with non-positive signed volume
        UnknownRegionError: a tag with no declared material
    """
    volumes = tet_volumes(mesh)
    bad = np.flatnonzero(volumes <= 0)
    if len(bad):
        raise NegativeVolumeError(int(bad[0]), float(volumes[bad[0]]))
    if known_tags is not None:
        unknown = set(mesh.tags.tolist()) - set(known_tags)
        if unknown:
            raise UnknownRegionError(f"Region tags without a material: {sorted(unknown)}")


def _orient_positive(vertices: np.ndarray, tets: np.ndarray) -> np.ndarray:
    tets = tets.copy()
    flip = _signed_volumes(vertices, tets) < 0
    tets[flip, 2], tets[flip, 3] = tets[flip, 3].copy(), tets[flip, 2].copy()
    return tets


# ============================================================================
# GENERATION AND TAGGING
# ============================================================================

def generate_box_mesh(half_width: float, divisions: int) -> Mesh:
    """
    Structured mesh of the cube [-half_width, half_width]^3.

    Each hexahedral cell is split into the six Kuhn tets sharing its main
    diagonal, which makes the split conforming across cells.

    Args:
        half_width: Half side length of the truncated domain (object scale units)
        divisions: Number of cells per axis

    Returns:
        Mesh with every tet tagged exterior
    """
    if divisions < 1:
        raise InvalidArgumentError(f"divisions must be at least 1, got {divisions}")
    if half_width <= 0:
        raise InvalidArgumentError(f"half_width must be positive, got {half_width}")

    n = int(divisions)
    coords = np.linspace(-half_width, half_width, n + 1)
    zz, yy, xx = np.meshgrid(coords, coords, coords, indexing="ij")
    vertices = np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])

    def vid(i, j, k):
        return i + (n + 1) * (j + (n + 1) * k)

    ci, cj, ck = (a.ravel() for a in np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij"))
    blocks = []
    for perm in permutations(range(3)):
        corner = np.zeros(3, dtype=int)
        path = [corner.copy()]
        for axis in perm:
            corner[axis] += 1
            path.append(corner.copy())
        blocks.append(np.column_stack([vid(ci + p[0], cj + p[1], ck + p[2]) for p in path]))
    tets = _orient_positive(vertices, np.vstack(blocks))
    tags = np.full(len(tets), EXTERIOR_TAG, dtype=object)

    mesh = Mesh(vertices, tets, tags)
    logger.info(f"Generated box mesh: {mesh.n_vertices} vertices, {mesh.n_tets} tets, {mesh.n_edges} edges")
    return mesh


def tag_regions(mesh: Mesh, shapes: Sequence[Union[Shape, Tuple[Shape, str]]]) -> Mesh:
    """
    Tag tets whose centroid lies inside a shape.

    Tagging always starts from an all-exterior mesh, so applying the same
    shape list twice gives identical tags.

    Args:
        mesh: Mesh to tag
        shapes: Shapes (or (shape, tag) pairs overriding the shape's tag)

    Returns:
        New mesh carrying the tags and the shape list

    Raises:
        AmbiguousRegionError: a centroid lies in two shapes with different tags
    """
    resolved = []
    for item in shapes:
        if isinstance(item, Shape):
            resolved.append(item)
        else:
            shape, tag = item
            resolved.append(Shape(shape.kind, shape.params, tag))

    centroids = tet_centroids(mesh)
    tags = np.full(mesh.n_tets, EXTERIOR_TAG, dtype=object)
    claimed = np.zeros(mesh.n_tets, dtype=bool)
    for shape in resolved:
        inside = shape.contains(centroids)
        conflict = inside & claimed & (tags != shape.region_tag)
        if np.any(conflict):
            first = int(np.flatnonzero(conflict)[0])
            raise AmbiguousRegionError(
                f"Tet {first} lies in shapes tagged {tags[first]!r} and {shape.region_tag!r}"
            )
        tags[inside] = shape.region_tag
        claimed |= inside

    tagged = mesh.with_tags(tags, shapes=resolved)
    logger.info(f"Tagged {int(claimed.sum())} of {mesh.n_tets} tets into {len(resolved)} shape(s)")
    return tagged


# ============================================================================
# LOCAL REFINEMENT
# ============================================================================

def _closure_marks(tet_edges: np.ndarray, edge_marks: np.ndarray) -> np.ndarray:
    """Grow edge marks until every tet has 0, 1, a full face or all 6 marked."""
    marks = edge_marks.copy()
    while True:
        local = marks[tet_edges]                        # (T, 6)
        count = local.sum(axis=1)
        face_full = np.any(np.all(local[:, FACE_EDGES], axis=2), axis=1)
        allowed = (count <= 1) | (count == 6) | ((count == 3) & face_full)
        if np.all(allowed):
            return marks
        marks[tet_edges[~allowed].ravel()] = True


def _red_children(v: Sequence[int], m: Dict[Tuple[int, int], int], vertices: np.ndarray) -> List[List[int]]:
    a, b, c, d = v
    m01, m02, m03 = m[(0, 1)], m[(0, 2)], m[(0, 3)]
    m12, m13, m23 = m[(1, 2)], m[(1, 3)], m[(2, 3)]
    children = [[a, m01, m02, m03], [m01, b, m12, m13], [m02, m12, c, m23], [m03, m13, m23, d]]

    # Split the inner octahedron along its shortest diagonal
    diagonals = {
        (m01, m23): (m02, m03, m13, m12),
        (m02, m13): (m01, m03, m23, m12),
        (m03, m12): (m01, m02, m23, m13),
    }
    p, q = min(diagonals, key=lambda e: np.linalg.norm(vertices[e[0]] - vertices[e[1]]))
    ring = diagonals[(p, q)]
    for k in range(4):
        children.append([p, q, ring[k], ring[(k + 1) % 4]])
    return children


def _split_tet(v: Sequence[int], local_marks: np.ndarray, midpoint: Dict[Tuple[int, int], int],
               vertices: np.ndarray) -> List[List[int]]:
    count = int(local_marks.sum())
    if count == 6:
        return _red_children(v, midpoint, vertices)
    if count == 1:
        e = int(np.flatnonzero(local_marks)[0])
        i, j = LOCAL_EDGES[e]
        k, l = [x for x in range(4) if x not in (i, j)]
        mid = midpoint[(i, j)]
        return [[v[i], mid, v[k], v[l]], [mid, v[j], v[k], v[l]]]
    # Three marked edges on one face: split that face into four, join to the apex
    face = int(np.flatnonzero(np.all(local_marks[FACE_EDGES], axis=1))[0])
    i, j, k = LOCAL_FACES[face]
    apex = face
    mij, mik, mjk = midpoint[(i, j)], midpoint[(i, k)], midpoint[(j, k)]
    return [[v[i], mij, mik, v[apex]], [mij, v[j], mjk, v[apex]],
            [mik, mjk, v[k], v[apex]], [mij, mjk, mik, v[apex]]]


def _refine_once(mesh: Mesh, marked_tets: np.ndarray) -> Mesh:
    edge_marks = np.zeros(mesh.n_edges, dtype=bool)
    edge_marks[mesh.tet_edges[marked_tets].ravel()] = True
    edge_marks = _closure_marks(mesh.tet_edges, edge_marks)

    marked_edges = np.flatnonzero(edge_marks)
    new_ids = np.full(mesh.n_edges, -1, dtype=np.int64)
    new_ids[marked_edges] = mesh.n_vertices + np.arange(len(marked_edges))
    midpoints = mesh.vertices[mesh.edges[marked_edges]].mean(axis=1)
    vertices = np.vstack([mesh.vertices, midpoints])

    local_marks = edge_marks[mesh.tet_edges]
    touched = local_marks.any(axis=1)

    new_tets = [mesh.tets[~touched]]
    new_tags = [mesh.tags[~touched]]
    children, child_tags = [], []
    for t in np.flatnonzero(touched):
        v = mesh.tets[t]
        midpoint = {tuple(LOCAL_EDGES[e]): int(new_ids[mesh.tet_edges[t, e]])
                    for e in range(6) if local_marks[t, e]}
        split = _split_tet(v, local_marks[t], midpoint, vertices)
        children.extend(split)
        child_tags.extend([mesh.tags[t]] * len(split))
    if children:
        new_tets.append(np.asarray(children, dtype=np.int64))
        new_tags.append(np.asarray(child_tags, dtype=object))

    tets = _orient_positive(vertices, np.vstack(new_tets))
    return Mesh(vertices, tets, np.concatenate(new_tags), mesh.shapes)


def refine_toward_object(mesh: Mesh, levels: int) -> Mesh:
    """
    Red-refine every tet touching the object bounding box, `levels` times.

    Neighbours with hanging edges are closed by bisection (one marked edge)
    or face splits (three marked edges on a face); any other pattern is
    promoted to a red split. When the mesh carries its tagging shapes, the
    refined mesh is re-tagged so the voxelated object follows the finer
    centroids.

    Args:
        mesh: Tagged mesh
        levels: Number of refinement sweeps (0 returns the mesh unchanged)

    Returns:
        Refined, conforming mesh
    """
    if levels < 0:
        raise InvalidArgumentError(f"levels must be non-negative, got {levels}")
    for level in range(levels):
        box = object_bounding_box(mesh)
        if box is None:
            logger.warning("No object region to refine toward")
            return mesh
        lower, upper = box
        pts = mesh.vertices[mesh.tets]
        touching = np.all(pts.max(axis=1) >= lower, axis=1) & np.all(pts.min(axis=1) <= upper, axis=1)
        mesh = _refine_once(mesh, np.flatnonzero(touching))
        if mesh.shapes:
            mesh = tag_regions(mesh, mesh.shapes)
        validate_mesh(mesh)
        logger.info(f"Refinement level {level + 1}: {mesh.n_tets} tets, {mesh.n_edges} edges")
    return mesh


# ============================================================================
# NEUTRAL FILE FORMAT
# ============================================================================

def _content_lines(text: str) -> List[Tuple[int, str]]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            lines.append((number, content))
    return lines


def read_mesh_file(path: Union[str, Path], known_tags: Optional[Iterable[str]] = None) -> Mesh:
    """
    Read a mesh in the neutral ASCII format.

    Format: vertex count, then "x y z" lines, then tet count, then
    "v1 v2 v3 v4 tag" lines with 1-based indices. Blank lines and
    "#" comments are ignored.

    Args:
        path: File to read
        known_tags: Region tags with declared materials (unchecked if None)

    Returns:
        Validated mesh
    """
    lines = _content_lines(Path(path).read_text(encoding="utf-8"))
    cursor = 0

    def take(what: str) -> Tuple[int, List[str]]:
        nonlocal cursor
        if cursor >= len(lines):
            last = lines[-1][0] if lines else 0
            raise MeshParseError(f"unexpected end of file while reading {what}", last + 1)
        number, content = lines[cursor]
        cursor += 1
        return number, content.split()

    def parse_count(what: str) -> int:
        number, tokens = take(what)
        if len(tokens) != 1 or not tokens[0].isdigit():
            raise MeshParseError(f"expected a single {what}, got {' '.join(tokens)!r}", number)
        return int(tokens[0])

    n_vertices = parse_count("vertex count")
    vertices = np.empty((n_vertices, 3))
    for k in range(n_vertices):
        number, tokens = take("vertex")
        try:
            if len(tokens) != 3:
                raise ValueError
            vertices[k] = [float(t) for t in tokens]
        except ValueError:
            raise MeshParseError(f"expected 'x y z', got {' '.join(tokens)!r}", number) from None

    n_tets = parse_count("tet count")
    tets = np.empty((n_tets, 4), dtype=np.int64)
    tags = []
    for k in range(n_tets):
        number, tokens = take("tet")
        try:
            if len(tokens) != 5:
                raise ValueError
            tets[k] = [int(t) - 1 for t in tokens[:4]]
        except ValueError:
            raise MeshParseError(f"expected 'v1 v2 v3 v4 tag', got {' '.join(tokens)!r}", number) from None
        if tets[k].min() < 0 or tets[k].max() >= n_vertices:
            raise MeshParseError(f"vertex index out of range in tet {k}", number)
        tags.append(tokens[4])
    if cursor < len(lines):
        raise MeshParseError("trailing content after the last tet", lines[cursor][0])

    mesh = Mesh(vertices, tets, np.asarray(tags, dtype=object))
    validate_mesh(mesh, known_tags)
    logger.info(f"Read mesh {path}: {mesh.n_vertices} vertices, {mesh.n_tets} tets")
    return mesh


def write_mesh_file(mesh: Mesh, path: Union[str, Path]) -> None:
    """Write a mesh in the neutral ASCII format read by read_mesh_file."""
    out = [f"# {mesh.n_vertices} vertices, {mesh.n_tets} tets", str(mesh.n_vertices)]
    out.extend(f"{x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist())
    out.append(str(mesh.n_tets))
    out.extend(f"{a + 1} {b + 1} {c + 1} {d + 1} {tag}"
               for (a, b, c, d), tag in zip(mesh.tets.tolist(), mesh.tags.tolist()))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")
