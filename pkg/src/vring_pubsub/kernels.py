"""Hot loops, compiled when possible.

The Cython extension is used when it imports; otherwise the pure-Python
twins are selected. Set ``VRING_PUBSUB_PURE=1`` to force the fallback.
"""

import os

from . import _pykernels as python

if os.environ.get("VRING_PUBSUB_PURE"):
    compiled = None
else:
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"

next_subscriber_table = _impl.next_subscriber_table
route_publication = _impl.route_publication
bfs_parents = _impl.bfs_parents

__all__ = ["BACKEND", "bfs_parents", "compiled", "next_subscriber_table", "python",
           "route_publication"]
