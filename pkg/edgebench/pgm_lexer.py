# edgebench/pgm_lexer.py

import ply.lex as lex
from edgebench.exceptions import PgmHeaderError

class PgmHeaderLexer:
    """
    Tokenizes the text header of a portable graymap: the magic number,
    then width, height and maxval as integers. '#' comments run to end of line.
    """
    tokens = ['MAGIC', 'NUMBER']

    t_ignore = ' \t\r\n\v\f'
    t_ignore_COMMENT = r'\#[^\n]*'

    def t_MAGIC(self, t):
        r'P[0-9](?=[\s\#])'
        return t

    def t_NUMBER(self, t):
        r'\d+'
        t.value = int(t.value)
        return t

    def t_error(self, t):
        raise PgmHeaderError(f"Unexpected character {t.value[0]!r} in header at offset {t.lexpos}")

    def build(self, **kwargs):
        self.lexer = lex.lex(module=self, **kwargs)

    def header(self, data, count=4):
        """
        Read the first `count` tokens from `data` (raw bytes).

        Returns (tokens, end) where `end` is the offset just past the last
        token. Tokens are pulled lazily, so the binary raster is never lexed.
        """
        # a clone per call keeps the shared lexer free of state between threads
        # latin-1 maps every byte to one character, so offsets stay byte offsets
        lexer = self.lexer.clone()
        lexer.input(data.decode("latin-1"))
        tokens = []
        end = 0
        while len(tokens) < count:
            tok = lexer.token()
            if tok is None:
                break
            tokens.append(tok)
            end = lexer.lexpos
        return tokens, end
