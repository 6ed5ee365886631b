# Copyright 2026 The qdg Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# =========================================================================

"""Python front end for the qdg C++ core."""

import cmath
import json as _json

from . import _qdg
from ._qdg import Error, e_char, find_theta_coweight, hall_dims, l_q, lie_closure, theta, witt_dimension

__all__ = [
    "Error",
    "check_necessary",
    "dim_v",
    "e_char",
    "find_theta_coweight",
    "hall_dims",
    "l_q",
    "lie_closure",
    "newton",
    "realize_local",
    "run",
    "theta",
    "wild_local_group",
    "witt_dimension",
]

DEFAULT_Q = 3.0 * cmath.exp(0.4j)


def _text(doc):
    return doc if isinstance(doc, str) else _json.dumps(doc)


def newton(system):
    """Slopes and multiplicities of a system given as a dict or JSON text."""
    slopes, mults = _qdg.newton(_text(system))
    return {"slopes": slopes, "mults": mults}


def dim_v(system, delta):
    return _qdg.dim_v(_text(system), delta)


def wild_local_group(system, q=DEFAULT_Q):
    return _json.loads(_qdg.wild_local_group(_text(system), q))


def check_necessary(group):
    return dict(_qdg.check_necessary(_text(group)))


def realize_local(group, q=DEFAULT_Q):
    return _json.loads(_qdg.realize_local(_text(group), q))


def run(*args):
    """Runs a qdg command in-process. Returns (status, parsed JSON or None, stderr)."""
    status, out, err = _qdg.run([str(a) for a in args])
    try:
        doc = _json.loads(out) if out else None
    except ValueError:
        doc = None
    return status, doc, err
