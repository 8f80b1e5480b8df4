from .config import ModelConfig
from .coder import ConvDecoder, ConvEncoder
from .norms import ChannelNorm, ChunkNorm, normalize
from .dprnn import DPRNNLayer, DPRNNStack, StreamingState
from .attention import AttentiveCombiner, combination_weights
from .clue import AudioClueNet, VideoClueNet
from .network import AuxInput, ForwardDiagnostics, MtseNet, fuse
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "ModelConfig",
    "ConvEncoder",
    "ConvDecoder",
    "ChannelNorm",
    "ChunkNorm",
    "normalize",
    "DPRNNLayer",
    "DPRNNStack",
    "StreamingState",
    "AttentiveCombiner",
    "combination_weights",
    "AudioClueNet",
    "VideoClueNet",
    "AuxInput",
    "ForwardDiagnostics",
    "MtseNet",
    "fuse",
    "load_checkpoint",
    "save_checkpoint",
]
