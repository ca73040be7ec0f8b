"""
File: errors.py
Description: Exceptions raised by lectbench. They derive from the builtin
exceptions so that callers may keep catching ValueError or RuntimeError.
"""


class LectError(Exception):
    """Base class of every lectbench error."""


class GraphFormatError(LectError, ValueError):
    """A graph file or graph object violates the text-attributed graph format.

    Args:
        message (str): Description of the problem.
        locator (str): Identification of the offending record (for example
            'edges[12]' or 'nodes[3]'). Default is None.

    """
    def __init__(self, message, locator=None):
        if locator is not None:
            message = "{}: {}".format(locator, message)
        super().__init__(message)
        self.locator = locator


class SplitError(LectError, ValueError):
    """The split specification cannot be applied to the graph."""


class DimensionMismatchError(LectError, ValueError):
    """Two arrays that must agree on a dimension do not."""


class EncoderError(LectError, RuntimeError):
    """Text encoding failed for a node.

    Args:
        message (str): Description of the failure.
        node_index (int): Index of the first node that could not be encoded.

    """
    def __init__(self, message, node_index=None):
        if node_index is not None:
            message = "node {:d}: {}".format(node_index, message)
        super().__init__(message)
        self.node_index = node_index


class RemoteServiceError(LectError, RuntimeError):
    """A remote service answered with an error or could not be reached.

    Args:
        message (str): Description of the failure.
        status (int): HTTP status code, None if no response was received.

    """
    def __init__(self, message, status=None):
        if status is not None:
            message = "HTTP {:d}: {}".format(status, message)
        super().__init__(message)
        self.status = status


class GenerationError(LectError, RuntimeError):
    """Text generation failed for a pseudo-OOD node."""
    def __init__(self, message, node_id=None):
        if node_id is not None:
            message = "pseudo node {:d}: {}".format(node_id, message)
        super().__init__(message)
        self.node_id = node_id


class NonFiniteError(LectError, ArithmeticError):
    """A NaN or infinite value appeared in a named computation."""
    def __init__(self, component):
        super().__init__("non-finite value in {}".format(component))
        self.component = component


class DivergenceError(LectError, RuntimeError):
    """Training produced a non-finite loss.

    Args:
        epoch (int): Epoch at which the divergence was detected.
        checkpoint_path (str): Path of the last good checkpoint, None if it
            was not saved.
        cause (Exception): The underlying error.

    """
    def __init__(self, epoch, checkpoint_path=None, cause=None):
        message = "training diverged at epoch {:d}".format(epoch)
        if cause is not None:
            message += " ({})".format(cause)
        if checkpoint_path is not None:
            message += "; last good checkpoint: {}".format(checkpoint_path)
        super().__init__(message)
        self.epoch = epoch
        self.checkpoint_path = checkpoint_path


class MissingArtifactError(LectError, FileNotFoundError):
    """An input artifact is missing.

    Args:
        path (str): The missing path.
        command (str): The lect command producing the artifact.

    """
    def __init__(self, path, command):
        super().__init__("missing {}: run {} first".format(path, command))
        self.path = path
        self.command = command
