"""P1 meshes on the unit interval and axis-aligned rectangles.

Provides uniform meshes with per-element measures, midpoints/centroids,
constant P1 basis gradients, Dirichlet boundary masks, one-point quadrature
and CSV export of nodes, elements and nodal solutions.
"""

import itertools
import os
import tempfile

import numpy as np

__all__ = [
    'Mesh', 'GridFunction', 'MeshMismatchError', 'build_mesh',
    'interval_mesh', 'rectangle_mesh', 'interpolate', 'integrate',
    'element_gradient', 'project_dirichlet', 'require_same_mesh',
    'write_solution_csv', 'write_mesh_csv', 'atomic_write_text',
]

_mesh_ids = itertools.count(1)


class MeshMismatchError(ValueError):
    """Operands were built on different meshes."""


def require_same_mesh(*objs):
    """Raise MeshMismatchError unless all objects carry the same mesh."""
    ids = {obj.mesh.mesh_id for obj in objs}
    if len(ids) > 1:
        raise MeshMismatchError('operands live on different meshes: ids %s'
                                % sorted(ids))


class Mesh:
    """Conforming P1 mesh: segments on (0,1) or right triangles on a rectangle.

    Immutable after construction (arrays are write-protected), so instances
    can be shared freely across threads.  Geometry cached per element:

        element_measures   lengths (1D) or areas (2D), all positive
        element_midpoints  segment midpoints / triangle centroids
        basis_gradients    (n_elements, verts_per_element, dim) constant
                           gradients of the local hat functions
    """

    def __init__(self, dim, nodes, elements, boundary_mask):
        self.mesh_id = next(_mesh_ids)
        self.dim = int(dim)
        self.nodes = np.asarray(nodes, dtype=float)
        self.elements = np.asarray(elements, dtype=int)
        self.boundary_mask = np.asarray(boundary_mask, dtype=bool)
        if self.dim == 1:
            self.nodes = self.nodes.reshape(-1, 1)
        if self.boundary_mask.shape != (self.n_nodes,):
            raise ValueError('boundary mask length != number of nodes')
        self._build_geometry()
        for arr in (self.nodes, self.elements, self.boundary_mask,
                    self.element_measures, self.element_midpoints,
                    self.basis_gradients):
            arr.setflags(write=False)

    def _build_geometry(self):
        pts = self.nodes[self.elements]  # (ne, verts, dim)
        if self.dim == 1:
            lengths = pts[:, 1, 0] - pts[:, 0, 0]
            if np.any(lengths <= 0):
                raise ValueError('degenerate 1D element (non-positive length)')
            self.element_measures = lengths
            self.element_midpoints = pts.mean(axis=1)
            grads = np.empty((self.n_elements, 2, 1))
            grads[:, 0, 0] = -1.0 / lengths
            grads[:, 1, 0] = 1.0 / lengths
            self.basis_gradients = grads
        elif self.dim == 2:
            d1 = pts[:, 1] - pts[:, 0]
            d2 = pts[:, 2] - pts[:, 0]
            twice_area = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
            if np.any(twice_area <= 0):
                raise ValueError('degenerate or misoriented triangle')
            self.element_measures = 0.5 * twice_area
            self.element_midpoints = pts.mean(axis=1)
            # gradient of barycentric coordinate i from the opposite edge
            grads = np.empty((self.n_elements, 3, 2))
            for i in range(3):
                j, k = (i + 1) % 3, (i + 2) % 3
                grads[:, i, 0] = (pts[:, j, 1] - pts[:, k, 1]) / twice_area
                grads[:, i, 1] = (pts[:, k, 0] - pts[:, j, 0]) / twice_area
            self.basis_gradients = grads
        else:
            raise ValueError('dim must be 1 or 2, got %r' % self.dim)

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    @property
    def verts_per_element(self):
        return self.elements.shape[1]

    @property
    def domain_measure(self):
        return float(np.sum(self.element_measures))

    @property
    def interior_mask(self):
        return ~self.boundary_mask

    def element_values(self, nodal_values):
        """P1 interpolant at element midpoints/centroids (vertex means)."""
        return np.asarray(nodal_values)[self.elements].mean(axis=1)

    def element_gradients(self, nodal_values):
        """Constant P1 gradient per element, shape (n_elements, dim)."""
        local = np.asarray(nodal_values)[self.elements]
        return np.einsum('evd,ev->ed', self.basis_gradients, local)

    def __repr__(self):
        return ('Mesh(dim=%d, nodes=%d, elements=%d, id=%d)'
                % (self.dim, self.n_nodes, self.n_elements, self.mesh_id))


class GridFunction:
    """Nodal values of a P1 function on a mesh.

    Membership in the zero-trace space means all Dirichlet-boundary values
    vanish; use project_dirichlet to enforce it and is_dirichlet_compliant
    to test it.
    """

    def __init__(self, mesh, values):
        self.mesh = mesh
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (mesh.n_nodes,):
            raise ValueError('expected %d nodal values, got shape %s'
                             % (mesh.n_nodes, self.values.shape))

    @property
    def mesh_id(self):
        return self.mesh.mesh_id

    @property
    def nodal_values(self):
        return self.values

    def is_dirichlet_compliant(self, tol=0.0):
        bvals = self.values[self.mesh.boundary_mask]
        return bool(np.all(np.abs(bvals) <= tol))

    def copy(self):
        return GridFunction(self.mesh, self.values.copy())

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def nodal_norm(self):
        """Euclidean norm of the nodal value vector."""
        return float(np.linalg.norm(self.values))

    def __add__(self, other):
        require_same_mesh(self, other)
        return GridFunction(self.mesh, self.values + other.values)

    def __sub__(self, other):
        require_same_mesh(self, other)
        return GridFunction(self.mesh, self.values - other.values)

    def __mul__(self, scalar):
        return GridFunction(self.mesh, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.mesh, -self.values)

    def __repr__(self):
        return ('GridFunction(mesh_id=%d, max|u|=%.3g)'
                % (self.mesh_id, self.max_abs()))


def interval_mesh(n_elements):
    """Uniform mesh of (0,1) with n_elements segments."""
    if n_elements < 2:
        raise ValueError('mesh: resolution must be >= 2 (no interior node)')
    nodes = np.linspace(0.0, 1.0, n_elements + 1)
    elems = np.column_stack([np.arange(n_elements), np.arange(1, n_elements + 1)])
    mask = np.zeros(n_elements + 1, dtype=bool)
    mask[0] = mask[-1] = True
    return Mesh(1, nodes, elems, mask)


def rectangle_mesh(nx, ny, width=1.0, height=1.0):
    """Uniform right-triangle mesh of (0,width) x (0,height), 2 triangles per cell."""
    if min(nx, ny) < 2:
        raise ValueError('mesh: resolution must be >= 2 (no interior node)')
    if width <= 0 or height <= 0:
        raise ValueError('rectangle sides must be positive')
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing='ij')
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return i * (ny + 1) + j

    elems = []
    for i in range(nx):
        for j in range(ny):
            v00, v10 = nid(i, j), nid(i + 1, j)
            v01, v11 = nid(i, j + 1), nid(i + 1, j + 1)
            elems.append((v00, v10, v11))
            elems.append((v00, v11, v01))
    mask = ((nodes[:, 0] == 0.0) | (nodes[:, 0] == width)
            | (nodes[:, 1] == 0.0) | (nodes[:, 1] == height))
    return Mesh(2, nodes, np.array(elems), mask)


def build_mesh(dim, resolution, extent=None):
    """Build a uniform mesh: interval (dim=1) or rectangle (dim=2).

    resolution is the element count per direction (int, or a pair for
    dim=2).  extent gives the rectangle sides for dim=2 (default unit
    square).  Requires at least 2 elements per direction so an interior
    node exists.
    """
    if dim == 1:
        return interval_mesh(int(resolution))
    if dim == 2:
        if np.isscalar(resolution):
            nx = ny = int(resolution)
        else:
            nx, ny = (int(r) for r in resolution)
        width, height = extent if extent is not None else (1.0, 1.0)
        return rectangle_mesh(nx, ny, width, height)
    raise ValueError('dim must be 1 or 2, got %r' % dim)


def interpolate(fn, mesh, zero_boundary=True):
    """Nodal interpolant of fn(x) (1D) or fn(x, y) (2D) as a GridFunction."""
    coords = [mesh.nodes[:, d] for d in range(mesh.dim)]
    values = np.asarray(fn(*coords), dtype=float)
    values = np.broadcast_to(values, (mesh.n_nodes,)).copy()
    u = GridFunction(mesh, values)
    return project_dirichlet(u) if zero_boundary else u


def integrate(values, mesh):
    """One-point quadrature: sum of measure(e) * value(e) over elements."""
    values = np.asarray(values, dtype=float)
    if values.shape != (mesh.n_elements,):
        raise ValueError('expected one value per element (%d), got shape %s'
                         % (mesh.n_elements, values.shape))
    return float(np.sum(mesh.element_measures * values))


def element_gradient(u, e):
    """Constant P1 gradient of u on element e, as a vector of length dim."""
    verts = u.mesh.elements[e]
    return u.mesh.basis_gradients[e].T @ u.values[verts]


def project_dirichlet(u):
    """Zero the Dirichlet-boundary nodal values; interior untouched."""
    values = np.where(u.mesh.boundary_mask, 0.0, u.values)
    return GridFunction(u.mesh, values)


def atomic_write_text(path, text):
    """Write text to path atomically (temp file + rename)."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix='.tmp')
    try:
        with os.fdopen(fd, 'w') as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x):
    return '%.17g' % x


def write_solution_csv(u, path):
    """Write nodal solution as CSV columns node_index,x[,y],u (17 sig digits)."""
    mesh = u.mesh
    header = 'node_index,x,u' if mesh.dim == 1 else 'node_index,x,y,u'
    lines = [header]
    for i in range(mesh.n_nodes):
        coords = ','.join(_fmt(c) for c in mesh.nodes[i])
        lines.append('%d,%s,%s' % (i, coords, _fmt(u.values[i])))
    atomic_write_text(path, '\n'.join(lines) + '\n')


def write_mesh_csv(mesh, nodes_path, elements_path):
    """Write the node table (with boundary flags) and element table as CSV."""
    head = 'node_index,x,boundary' if mesh.dim == 1 else 'node_index,x,y,boundary'
    lines = [head]
    for i in range(mesh.n_nodes):
        coords = ','.join(_fmt(c) for c in mesh.nodes[i])
        lines.append('%d,%s,%d' % (i, coords, int(mesh.boundary_mask[i])))
    atomic_write_text(nodes_path, '\n'.join(lines) + '\n')

    head = ('element_index,' +
            ','.join('v%d' % k for k in range(mesh.verts_per_element)) +
            ',measure')
    lines = [head]
    for e in range(mesh.n_elements):
        verts = ','.join(str(v) for v in mesh.elements[e])
        lines.append('%d,%s,%s' % (e, verts, _fmt(mesh.element_measures[e])))
    atomic_write_text(elements_path, '\n'.join(lines) + '\n')
