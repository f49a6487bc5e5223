namespace sobex {}
