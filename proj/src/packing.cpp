// staged
