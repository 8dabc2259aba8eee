"""Reference external evaluator for the evolutionary search engine.

Speaks the newline-delimited JSON protocol on stdin/stdout, materializes
genome documents into small convolutional classifiers, trains them briefly
on a digits dataset and returns validation accuracy as fitness.
"""

from .data import DataBundle, load_dataset
from .model import GenomeError, GenomeNet, build_network, cell_sequence, parse_genome
from .serve import handle_request, serve
from .settings import TrainerSettings
from .training import derive_seed, train_and_eval

__version__ = "0.1.0"
