"""Model server for temporal-graph link prediction over line-delimited JSON.

Loads a checkpoint plus its interaction dataset and answers ``predict``
requests for (target event, excluded event ids) pairs by rebuilding the
filtered history and running the model forward pass, so exclusions are
exact rather than approximate.
"""

__version__ = "0.1.0"

from .data import EventLog, load_jodie_csv
from .model import ToyAttentionModel, load_checkpoint, save_checkpoint
from .service import BridgeService
