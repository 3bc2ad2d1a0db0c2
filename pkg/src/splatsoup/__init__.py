"""splatsoup: mesh-guided editing of flat-Gaussian splat scenes.

A recovered scene of flat (2D) Gaussians is encoded as a triangle soup,
one triangle per kernel. Edits made to a reference mesh in any sculpting
tool are carried onto the soup face by face through rigid frame changes,
and decoded back into Gaussian parameters. The package also ships the
surface-prior math the training stage of such scenes relies on
(distance-conditioned opacity, normal alignment loss, surface sampling),
a nearest-centroid spatial index, scene/mesh codecs, and a small
deterministic orthographic previewer.
"""

__version__ = "0.1.0"

from .errors import (
    CorrespondenceError,
    DegenerateTriangleError,
    EmptyMeshError,
    FaceIndexError,
    FormatError,
    NumericError,
    SidecarMismatchError,
    SoupStructureError,
    SplatSoupError,
    ValidationError,
)
from .gaussians import (
    FLAT_SCALE,
    SH_DC,
    FlatGaussian,
    GaussianCloud,
    as_cloud,
    gaussian_normal,
    matrix_to_quat,
    quat_to_matrix,
)
from .soup import (
    SoupAttributes,
    SoupTriangle,
    TriangleSoup,
    decode_soup,
    encode_soup,
    soup_from_triangles,
)
from .mesh import (
    DEFAULT_SAMPLE_COUNT,
    EditPair,
    IndexedMesh,
    MeshFace,
    SurfaceSamples,
    face_areas,
    face_centroid,
    face_centroids,
    face_normals,
    load_mesh,
    sample_surface,
    save_mesh,
    validate_edit_pair,
)
from .nearest import CentroidIndex, build_index, nearest_face
from .propagate import (
    AssociationReport,
    EditTransform,
    FaceFrame,
    apply_edit,
    edit_transform,
    face_frame,
    propagate_soup,
)
from .sdf import (
    DEFAULT_BETA,
    AnalyticSdf,
    Box,
    Intersection,
    OpacityParams,
    Plane,
    Sphere,
    Union,
    bell_opacity,
    conditioned_opacity,
    finite_diff_grad,
    load_sdf_scene,
    normal_loss,
    parse_sdf_scene,
    sdf_eval,
)
from .render import Image, OrthoCamera, dc_to_rgb, read_image, render, write_image
from .sceneio import (
    FlattenReport,
    default_sidecar_path,
    load_scene,
    load_soup,
    save_scene,
    save_soup,
)

__all__ = [name for name in dir() if not name.startswith("_")]
