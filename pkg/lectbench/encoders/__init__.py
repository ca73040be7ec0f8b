from .text_encoder import TextEncoder, HashEncoder, hash_encode, encode_all, tokenize
from .remote import RemoteEncoder, remote_encode
from .cache import EmbeddingCache, read_embeddings, write_embeddings


def build_encoder(encoder_cfg, remote_cfg=None):
    """Instantiate the encoder described by an EncoderConfig."""
    if encoder_cfg.kind == 'remote':
        if remote_cfg is None or not remote_cfg.embed_endpoint:
            raise ValueError("The remote encoder needs remote.embed_endpoint")
        return RemoteEncoder.from_config(encoder_cfg, remote_cfg)
    return HashEncoder(encoder_cfg.dim, encoder_cfg.seed)
