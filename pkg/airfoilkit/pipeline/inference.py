from typing import Sequence, Tuple

import numpy as np

from ..errors import DataError

# unseen nodes listed in the error message
SHOWN_UNSEEN = 10


def inference_average(
    passes: Sequence[Tuple[np.ndarray, np.ndarray]], n_nodes: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Merge predictions made on subsampled passes over one cloud: each node
    gets the mean of the values predicted for it. Returns the (n_nodes,
    channels) prediction and the number of passes that saw each node.
    """
    if not passes:
        raise DataError("no inference pass")
    width = np.asarray(passes[0][1]).shape[1]
    sums = np.zeros((n_nodes, width))
    counts = np.zeros(n_nodes, dtype=np.int64)
    for k, (indices, values) in enumerate(passes):
        indices = np.asarray(indices, dtype=np.int64)
        values = np.asarray(values, dtype=float)
        if values.shape != (len(indices), width):
            raise DataError(
                "pass {} has values of shape {} for {} nodes".format(k, values.shape, len(indices))
            )
        if len(indices) and (indices.min() < 0 or indices.max() >= n_nodes):
            raise DataError("pass {} indexes outside the cloud of {} nodes".format(k, n_nodes))
        # unbuffered so that repeated indices within a pass all count
        np.add.at(sums, indices, values)
        np.add.at(counts, indices, 1)

    unseen = np.flatnonzero(counts == 0)
    if len(unseen) > 0:
        shown = ", ".join(str(i) for i in unseen[:SHOWN_UNSEEN])
        more = "" if len(unseen) <= SHOWN_UNSEEN else ", ..."
        raise DataError("{} nodes never seen: {}{}".format(len(unseen), shown, more))
    return sums / counts[:, None], counts
