"""Autoregressive-LM generation worker for the augmentation toolkit.

Serves the newline-framed REQ/RES/ERR protocol over stdio or TCP, generating
utterances from dialogue-act strings (``nlg``) or dialogue-act strings from
utterances (``nlu``) with nucleus sampling. ``adapter finetune`` trains both
directions on a corpus file as separate model artifacts.
"""

__version__ = "0.1.0"
